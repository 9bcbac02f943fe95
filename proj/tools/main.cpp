#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "splatkit/camera_rigs.hpp"
#include "splatkit/image_io.hpp"
#include "splatkit/io.hpp"
#include "splatkit/metrics.hpp"
#include "splatkit/netshell.hpp"
#include "splatkit/parallel.hpp"
#include "splatkit/pipeline.hpp"
#include "splatkit/projection.hpp"
#include "splatkit/remesh.hpp"
#include "splatkit/tensor_io.hpp"

namespace {

using namespace splatkit;
using nlohmann::json;

double auto_extent(const TriMesh& mesh, Eigen::Vector3d& center) {
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    center = 0.5 * (lo + hi);
    return 0.55 * (hi - lo).maxCoeff();
}

/// Expands "pred_{c,n}.ply" (or a plain prefix) into the pair of output paths.
std::pair<std::string, std::string> splat_output_paths(const std::string& pattern) {
    const size_t brace = pattern.find("{c,n}");
    if (brace != std::string::npos) {
        std::string c = pattern, n = pattern;
        c.replace(brace, 5, "c");
        n.replace(brace, 5, "n");
        return {c, n};
    }
    return {pattern + "_c.ply", pattern + "_n.ply"};
}

int cmd_encode(const std::string& mesh_path, int order, uint64_t points, int size,
               const std::string& out, const std::string& raw_out, const std::string& preview,
               const std::string& weights_path, int channels, const std::string& rig_name,
               double extent_flag, uint64_t seed) {
    const TriMesh mesh = load_mesh(mesh_path);
    Eigen::Vector3d center;
    double extent = auto_extent(mesh, center);
    if (extent_flag > 0.0) extent = extent_flag;

    const FourierCloud expanded = fourier_expand(mesh.vertices, order);
    const FourierCloud dense =
        densify_surface(mesh, expanded.features, std::max<uint64_t>(points, mesh.vertices.size()),
                        seed);
    const auto cameras = make_camera_rig(parse_camera_rig(rig_name), size, extent, center);
    if (cameras.size() != 3) throw ConfigError("encode needs a 3-view rig");
    const FourierStack stack = build_fourier_stack(dense, cameras);

    if (!raw_out.empty())
        save_tensor(stack_to_tensor({stack.views[0], stack.views[1], stack.views[2]}), raw_out);

    Conv2dWeights weights =
        weights_path.empty()
            ? Conv2dWeights::seeded_uniform(channels, FourierCloud::feature_length(order) + 6, 3,
                                            seed)
            : Conv2dWeights::from_manifest(WeightManifest::load(weights_path), "encoder");
    const auto encoded = encode_stack(stack, weights);
    save_tensor(stack_to_tensor({encoded[0], encoded[1], encoded[2]}), out);
    if (!preview.empty())
        for (int v = 0; v < 3; ++v)
            save_channel_previews(encoded[v], preview + "_view" + std::to_string(v));
    std::cout << "[info] encode done points=" << dense.size() << " out=" << out << "\n";
    return 0;
}

int cmd_render(const std::string& splat_path, const std::string& mesh_path,
               const std::string& mode_name, int size, const std::string& rig_name,
               int view_index, double sigma_edge, const std::string& out_prefix) {
    SoftRenderConfig config;
    config.sigma_edge = sigma_edge;

    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double extent = 1.0;
    GaussianSet set;
    TriMesh mesh;
    if (!splat_path.empty()) {
        set = load_gaussians_ply(splat_path);
        Eigen::Vector3d lo, hi;
        gaussian_bounds(set, lo, hi);
        center = 0.5 * (lo + hi);
        extent = 0.5 * (hi - lo).maxCoeff();
    } else if (!mesh_path.empty()) {
        mesh = load_mesh(mesh_path);
        extent = auto_extent(mesh, center);
    } else {
        throw ConfigError("render: provide --splat or --mesh");
    }

    const auto cameras = make_camera_rig(parse_camera_rig(rig_name), size, extent, center);
    if (view_index < 0 || view_index >= static_cast<int>(cameras.size()))
        throw ConfigError("render: view index out of range for rig " + rig_name);
    const OrthoCamera& camera = cameras[view_index];

    RenderOutput render;
    if (!splat_path.empty()) {
        const RenderMode mode = mode_name == "normal" ? RenderMode::Normal : RenderMode::Color;
        render = render_gaussians(set, camera, mode, config);
    } else {
        render = render_mesh(mesh, camera, config);
    }
    save_render(render, out_prefix);

    // capture everything needed to reproduce the render
    json manifest;
    manifest["input"] = splat_path.empty() ? mesh_path : splat_path;
    manifest["mode"] = mode_name;
    manifest["rig"] = rig_name;
    manifest["view"] = view_index;
    manifest["size"] = size;
    manifest["sigma_edge"] = config.sigma_edge;
    manifest["alpha_cutoff"] = config.alpha_cutoff;
    manifest["tile_size"] = config.tile_size;
    std::ofstream mf(out_prefix + "_render.json");
    mf << manifest.dump(2) << "\n";
    std::cout << "[info] render done out=" << out_prefix << "_image.png\n";
    return 0;
}

int cmd_run(const std::string& geo_path, const std::string& tex_path,
            const std::string& weights_path, const std::string& out_pattern, int base_channels,
            double extent, uint64_t seed) {
    const auto views = tensor_to_stack(load_tensor(geo_path));
    FeatureMap geo = views[0];
    for (size_t v = 1; v < views.size(); ++v) geo = concat_channels(geo, views[v]);
    const FeatureMap tex = to_feature_map(load_tensor(tex_path));

    const DualUNetWeights weights =
        weights_path.empty()
            ? DualUNetWeights::seeded_uniform(geo.channels() + tex.channels(), base_channels,
                                              Gaussian::kAttributeCount, seed)
            : DualUNetWeights::from_manifest(WeightManifest::load(weights_path));
    const DualUNetResult result = dual_unet_forward(geo, tex, weights);

    // decode on a front camera framed like the feature maps were
    const OrthoCamera front =
        make_look_camera({0.0, 0.0, -1.0}, Eigen::Vector3d::Zero(), extent, geo.width());
    const auto [out_c, out_n] = splat_output_paths(out_pattern);
    save_gaussians_ply(decode_gaussian_map(result.texture_map, front), out_c);
    save_gaussians_ply(decode_gaussian_map(result.normal_map, front), out_n);
    std::cout << "[info] run done out_c=" << out_c << " out_n=" << out_n << "\n";
    return 0;
}

int cmd_remesh(const std::string& splat_path, int views, int res, int iters, double step_size,
               double lambda_normal, double lambda_mask, double lambda_lap, int grid_res,
               double iso_level, double sigma_edge, const std::string& out,
               const std::string& report_path) {
    const GaussianSet set = load_gaussians_ply(splat_path);
    RemeshConfig config;
    config.iterations = iters;
    config.step_size = step_size;
    config.lambda_normal = lambda_normal;
    config.lambda_mask = lambda_mask;
    config.lambda_lap = lambda_lap;
    config.grid_res = grid_res;
    config.iso_level = iso_level;
    config.render.sigma_edge = sigma_edge;

    Eigen::Vector3d lo, hi;
    gaussian_bounds(set, lo, hi);
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double extent = 0.5 * (hi - lo).maxCoeff();
    for (int k = 0; k < views; ++k) {
        const double azimuth = 2.0 * EIGEN_PI * k / views;
        config.views.push_back(make_look_camera({-std::sin(azimuth), 0.0, -std::cos(azimuth)},
                                                center, extent, res));
    }

    auto [mesh, report] = remesh(set, config);
    save_mesh(mesh, out);

    if (!report_path.empty()) {
        json rj;
        rj["iterations"] = json::array();
        for (const auto& it : report.iterations)
            rj["iterations"].push_back(
                json{{"normal", it.normal}, {"mask", it.mask}, {"lap", it.lap}, {"total", it.total}});
        rj["wall_ms"] = report.wall_ms;
        rj["verts_before"] = report.verts_before;
        rj["verts_after"] = report.verts_after;
        std::ofstream rf(report_path);
        rf << rj.dump(2) << "\n";
    }
    std::cout << "[info] remesh done iters=" << report.iteration_count
              << " final_total=" << report.final_total << " out=" << out << "\n";
    return 0;
}

int cmd_eval_geometry(const std::string& pred_path, const std::string& gt_path, double tau,
                      uint64_t samples, uint64_t seed, const std::string& out) {
    const TriMesh pred = load_mesh(pred_path);
    const TriMesh gt = load_mesh(gt_path);
    const GeomReport report = evaluate_geometry(pred, gt, tau, samples, seed);
    json rj;
    rj["cd_p_to_s"] = report.cd_p_to_s;
    rj["cd_s_to_p"] = report.cd_s_to_p;
    rj["nc"] = report.nc;
    rj["fscore"] = report.fscore;
    rj["tau"] = report.tau;
    if (out.empty()) {
        std::cout << rj.dump(2) << "\n";
    } else {
        std::ofstream rf(out);
        rf << rj.dump(2) << "\n";
    }
    std::cout << "[info] eval geometry done cd=" << report.cd_p_to_s << "/" << report.cd_s_to_p
              << " nc=" << report.nc << " fscore=" << report.fscore << "\n";
    return 0;
}

int cmd_eval_image(const std::string& pred_path, const std::string& gt_path,
                   const std::string& view, const std::string& out) {
    const ImageReport report = evaluate_image(load_png(pred_path), load_png(gt_path), view);
    json rj;
    rj["psnr_db"] = report.psnr_db;
    rj["ssim"] = report.ssim;
    if (out.empty()) {
        std::cout << rj.dump(2) << "\n";
    } else {
        std::ofstream rf(out);
        rf << rj.dump(2) << "\n";
    }
    std::cout << "[info] eval image done psnr_db=" << report.psnr_db << " ssim=" << report.ssim
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"splatkit: gaussian-splat geometry tooling (fourier encoding, software "
                 "rendering, gaussian-enhanced remeshing, mesh/image metrics)"};
    app.require_subcommand(1);

    int threads = 0;
    uint64_t seed = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = hardware)");
    app.add_option("--seed", seed, "seed for all stochastic steps");

    // encode
    auto* encode = app.add_subcommand("encode", "fourier-encode a body mesh into feature maps");
    std::string mesh_path, out = "stack.bin", raw_out, preview, weights_path, rig = "front3";
    int order = 4, size = 512, channels = 8;
    uint64_t points = 65536;
    double extent = 0.0;
    encode->add_option("--mesh", mesh_path, "input mesh (.obj/.ply)")->required();
    encode->add_option("--order", order, "fourier order q");
    encode->add_option("--points", points, "densified surface point count");
    encode->add_option("--size", size, "projection resolution");
    encode->add_option("--out", out, "encoded feature tensor [3,o,H,W]");
    encode->add_option("--raw-out", raw_out, "also write the raw fourier stack [3,3(2q+1),H,W]");
    encode->add_option("--preview", preview, "write per-channel png previews with this prefix");
    encode->add_option("--weights", weights_path, "encoder conv weight manifest (seeded if unset)");
    encode->add_option("--channels", channels, "encoder output channels o");
    encode->add_option("--rig", rig, "projection rig (front3)");
    encode->add_option("--extent", extent, "camera half-extent (auto if <= 0)");

    // render
    auto* render = app.add_subcommand("render", "software-render a splat or mesh");
    std::string r_splat, r_mesh, r_mode = "color", r_rig = "front3", r_out = "render";
    int r_size = 512, r_view = 0;
    double r_sigma = 1.0;
    render->add_option("--splat", r_splat, "gaussian ply input");
    render->add_option("--mesh", r_mesh, "mesh input");
    render->add_option("--mode", r_mode, "color|normal (splat input only)");
    render->add_option("--size", r_size, "image size");
    render->add_option("--rig", r_rig, "camera rig (front3|ring8)");
    render->add_option("--view", r_view, "camera index within the rig");
    render->add_option("--sigma-edge", r_sigma, "mesh silhouette softness, pixels");
    render->add_option("--out", r_out, "output prefix");

    // run (dual reconstruction network)
    auto* run = app.add_subcommand("run", "dual reconstruction network forward pass");
    std::string g_geo, g_tex, g_weights, g_out = "pred_{c,n}.ply";
    int g_base = 32;
    run->add_option("--geo", g_geo, "encoded geometry tensor (stack.bin)")->required();
    run->add_option("--tex", g_tex, "texture feature tensor (texfeat.bin)")->required();
    run->add_option("--weights", g_weights, "NSW1 weight manifest (seeded if unset)");
    run->add_option("--out-splats", g_out, "output pattern, e.g. pred_{c,n}.ply");
    run->add_option("--base-channels", g_base, "unet base width");
    double g_extent = 1.0;
    run->add_option("--extent", g_extent, "decode camera half-extent (match the encode framing)");

    // remesh
    auto* rm = app.add_subcommand("remesh", "gaussian-enhanced mesh refinement");
    std::string m_splat, m_out = "refined.obj", m_report;
    int m_views = 8, m_res = 512, m_iters = 200, m_grid = 64;
    double m_step = 1.0, m_ln = 1.0, m_lm = 1.0, m_ll = 1.0, m_iso = -1.0, m_sigma = 1.0;
    rm->add_option("--splat", m_splat, "normal gaussian avatar ply")->required();
    rm->add_option("--views", m_views, "ring view count");
    rm->add_option("--res", m_res, "render resolution");
    rm->add_option("--iters", m_iters, "max iterations");
    rm->add_option("--step", m_step, "initial step size");
    rm->add_option("--lambda-normal", m_ln, "normal loss weight");
    rm->add_option("--lambda-mask", m_lm, "mask loss weight");
    rm->add_option("--lambda-lap", m_ll, "laplacian weight");
    rm->add_option("--grid-res", m_grid, "marching cubes resolution");
    rm->add_option("--iso", m_iso, "iso level (<0 = 0.3 * grid max)");
    rm->add_option("--sigma-edge", m_sigma, "silhouette softness, pixels");
    rm->add_option("--out", m_out, "refined mesh output");
    rm->add_option("--report", m_report, "iteration report json");

    // eval
    auto* eval = app.add_subcommand("eval", "geometry and image metrics");
    eval->require_subcommand(1);
    auto* eval_geo = eval->add_subcommand("geometry", "chamfer / nc / f-score between meshes");
    std::string e_pred, e_gt, e_out;
    double e_tau = 1.0;
    uint64_t e_samples = 100000;
    eval_geo->add_option("--pred", e_pred, "predicted mesh")->required();
    eval_geo->add_option("--gt", e_gt, "reference mesh")->required();
    eval_geo->add_option("--tau", e_tau, "f-score threshold (scene units)");
    eval_geo->add_option("--samples", e_samples, "surface samples per mesh");
    eval_geo->add_option("--out", e_out, "report json (stdout if unset)");
    auto* eval_img = eval->add_subcommand("image", "psnr / ssim between pngs");
    std::string i_pred, i_gt, i_out, i_view = "front";
    eval_img->add_option("--pred", i_pred, "predicted image")->required();
    eval_img->add_option("--gt", i_gt, "reference image")->required();
    eval_img->add_option("--view", i_view, "view tag recorded in the report");
    eval_img->add_option("--out", i_out, "report json (stdout if unset)");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "run the configured stages end to end");
    std::string p_config, p_out;
    pipe->add_option("--config", p_config, "pipeline config json")->required();
    pipe->add_option("--out", p_out, "override the configured output directory");

    CLI11_PARSE(app, argc, argv);
    splatkit::set_max_threads(threads);

    try {
        if (*encode)
            return cmd_encode(mesh_path, order, points, size, out, raw_out, preview, weights_path,
                              channels, rig, extent, seed);
        if (*render)
            return cmd_render(r_splat, r_mesh, r_mode, r_size, r_rig, r_view, r_sigma, r_out);
        if (*run) return cmd_run(g_geo, g_tex, g_weights, g_out, g_base, g_extent, seed);
        if (*rm)
            return cmd_remesh(m_splat, m_views, m_res, m_iters, m_step, m_ln, m_lm, m_ll, m_grid,
                              m_iso, m_sigma, m_out, m_report);
        if (*eval_geo) return cmd_eval_geometry(e_pred, e_gt, e_tau, e_samples, seed, e_out);
        if (*eval_img) return cmd_eval_image(i_pred, i_gt, i_view, i_out);
        if (*pipe) {
            PipelineConfig config = splatkit::load_pipeline_config(p_config);
            if (!p_out.empty()) config.out_dir = p_out;
            if (threads > 0) config.threads = threads;
            return splatkit::run_pipeline(config);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
