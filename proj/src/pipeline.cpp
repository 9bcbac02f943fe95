#include "splatkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "splatkit/camera_rigs.hpp"
#include "splatkit/image_io.hpp"
#include "splatkit/io.hpp"
#include "splatkit/metrics.hpp"
#include "splatkit/netshell.hpp"
#include "splatkit/parallel.hpp"
#include "splatkit/projection.hpp"
#include "splatkit/tensor_io.hpp"

namespace splatkit {

namespace fs = std::filesystem;
using nlohmann::json;

// ----------------------------------------------------------------- hashing

std::string hash_string(const std::string& data) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return hash_string(buffer.str());
}

// ------------------------------------------------------------------ config

namespace {

void check_keys(const json& object, const std::string& scope,
                const std::vector<std::string>& allowed) {
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown config key '" +
                              (scope.empty() ? it.key() : scope + "." + it.key()) + "'");
    }
}

template <typename T>
void read_if(const json& object, const char* key, T& value) {
    if (object.contains(key)) value = object.at(key).get<T>();
}

} // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json root;
    try {
        root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    PipelineConfig cfg;
    check_keys(root, "",
               {"paths", "fourier", "cameras", "texture", "netshell", "remesh", "metrics",
                "log_level", "threads", "seed"});

    if (root.contains("paths")) {
        const json& paths = root["paths"];
        check_keys(paths, "paths", {"mesh", "splat", "image", "gt_mesh", "out_dir"});
        read_if(paths, "mesh", cfg.mesh_path);
        read_if(paths, "splat", cfg.splat_path);
        read_if(paths, "image", cfg.image_path);
        read_if(paths, "gt_mesh", cfg.gt_mesh_path);
        read_if(paths, "out_dir", cfg.out_dir);
    }
    if (root.contains("fourier")) {
        const json& f = root["fourier"];
        check_keys(f, "fourier", {"order", "points", "size", "channels", "weights"});
        read_if(f, "order", cfg.fourier_order);
        read_if(f, "points", cfg.fourier_points);
        read_if(f, "size", cfg.fourier_size);
        read_if(f, "channels", cfg.encoder_channels);
        read_if(f, "weights", cfg.encoder_weights);
    }
    if (root.contains("cameras")) {
        const json& c = root["cameras"];
        check_keys(c, "cameras", {"rig", "size", "extent"});
        read_if(c, "rig", cfg.rig);
        read_if(c, "size", cfg.camera_size);
        read_if(c, "extent", cfg.camera_extent);
    }
    if (root.contains("texture")) {
        const json& t = root["texture"];
        check_keys(t, "texture", {"channels"});
        read_if(t, "channels", cfg.texture_channels);
    }
    if (root.contains("netshell")) {
        const json& n = root["netshell"];
        check_keys(n, "netshell", {"weights", "base_channels"});
        read_if(n, "weights", cfg.net_weights);
        read_if(n, "base_channels", cfg.unet_base_channels);
    }
    if (root.contains("remesh")) {
        const json& r = root["remesh"];
        check_keys(r, "remesh",
                   {"views", "size", "iterations", "step_size", "lambda_normal", "lambda_mask",
                    "lambda_lap", "grid_res", "iso_level", "stop_tol", "sigma_edge"});
        read_if(r, "views", cfg.remesh_views);
        read_if(r, "size", cfg.remesh_size);
        read_if(r, "iterations", cfg.remesh_iterations);
        read_if(r, "step_size", cfg.remesh_step_size);
        read_if(r, "lambda_normal", cfg.lambda_normal);
        read_if(r, "lambda_mask", cfg.lambda_mask);
        read_if(r, "lambda_lap", cfg.lambda_lap);
        read_if(r, "grid_res", cfg.grid_res);
        read_if(r, "iso_level", cfg.iso_level);
        read_if(r, "stop_tol", cfg.stop_tol);
        read_if(r, "sigma_edge", cfg.sigma_edge);
    }
    if (root.contains("metrics")) {
        const json& m = root["metrics"];
        check_keys(m, "metrics", {"tau", "samples"});
        read_if(m, "tau", cfg.metric_tau);
        read_if(m, "samples", cfg.metric_samples);
    }
    read_if(root, "log_level", cfg.log_level);
    read_if(root, "threads", cfg.threads);
    read_if(root, "seed", cfg.seed);
    return cfg;
}

// ------------------------------------------------------------------ stages

namespace {

struct Logger {
    bool verbose = true;
    void info(const std::string& message, const std::string& tail = "") const {
        if (verbose)
            std::cout << "[info] " << message << (tail.empty() ? "" : " " + tail) << "\n";
    }
};

std::string params_hash(const json& params) { return hash_string(params.dump()); }

/// Hash-keyed stage cache: a stage may be skipped when its manifest exists,
/// records identical input hashes and parameters, and all outputs exist.
class Stage {
public:
    Stage(std::string name, fs::path out_dir, Logger logger)
        : name_(std::move(name)), out_dir_(std::move(out_dir)), logger_(logger) {}

    void add_input(const std::string& path) { inputs_[path] = hash_file(path); }
    void set_params(json params) { params_ = std::move(params); }
    void add_output(const std::string& path) { outputs_.push_back(path); }

    bool cached() const {
        const fs::path manifest_path = out_dir_ / ("stage_" + name_ + ".manifest.json");
        std::ifstream in(manifest_path);
        if (!in) return false;
        json manifest;
        try {
            manifest = json::parse(in);
        } catch (...) {
            return false;
        }
        if (manifest.value("params_hash", "") != params_hash(params_)) return false;
        if (!manifest.contains("inputs")) return false;
        json recorded = manifest["inputs"];
        if (recorded.size() != inputs_.size()) return false;
        for (const auto& [path, hash] : inputs_) {
            if (!recorded.contains(path) || recorded[path] != hash) return false;
        }
        for (const auto& out : outputs_)
            if (!fs::exists(out)) return false;
        return true;
    }

    /// Runs `body` unless cached; writes the manifest afterwards.
    void run(const std::function<void()>& body) {
        if (cached()) {
            logger_.info("stage " + name_, "status=skipped(cached)");
            return;
        }
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        json manifest;
        manifest["stage"] = name_;
        manifest["inputs"] = inputs_;
        manifest["params"] = params_;
        manifest["params_hash"] = params_hash(params_);
        manifest["outputs"] = outputs_;
        manifest["wall_ms"] = wall_ms;
        std::ofstream out(out_dir_ / ("stage_" + name_ + ".manifest.json"));
        out << manifest.dump(2) << "\n";
        logger_.info("stage " + name_,
                     "status=done wall_ms=" + std::to_string(static_cast<long>(wall_ms)));
    }

private:
    std::string name_;
    fs::path out_dir_;
    Logger logger_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
    json params_;
};

Eigen::Vector3d mesh_center(const TriMesh& mesh, double* extent) {
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    if (extent) *extent = 0.55 * (hi - lo).maxCoeff();
    return 0.5 * (lo + hi);
}

std::vector<OrthoCamera> ring_views(int count, int size, double extent,
                                    const Eigen::Vector3d& center) {
    std::vector<OrthoCamera> views;
    for (int k = 0; k < count; ++k) {
        const double azimuth = 2.0 * EIGEN_PI * k / count;
        const Eigen::Vector3d dir(-std::sin(azimuth), 0.0, -std::cos(azimuth));
        views.push_back(make_look_camera(dir, center, extent, size));
    }
    return views;
}

} // namespace

int run_pipeline(const PipelineConfig& cfg) {
    Logger logger{cfg.log_level != "quiet"};
    set_max_threads(cfg.threads);

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    const std::string stack_path = (out_dir / "stack.bin").string();
    const std::string texfeat_path = (out_dir / "texfeat.bin").string();
    const std::string pred_c_path = (out_dir / "pred_c.ply").string();
    const std::string pred_n_path = (out_dir / "pred_n.ply").string();
    const std::string refined_path = (out_dir / "refined.obj").string();
    const std::string remesh_report_path = (out_dir / "remesh_report.json").string();
    const std::string report_path = (out_dir / "report.json").string();

    const bool with_network = !cfg.mesh_path.empty();
    std::string current_stage = "setup";
    try {
        // ---- geometry encoding
        if (with_network) {
            current_stage = "encode";
            Stage stage("encode", out_dir, logger);
            stage.add_input(cfg.mesh_path);
            if (!cfg.encoder_weights.empty()) stage.add_input(cfg.encoder_weights);
            stage.set_params(json{{"order", cfg.fourier_order},
                                  {"points", cfg.fourier_points},
                                  {"size", cfg.fourier_size},
                                  {"channels", cfg.encoder_channels},
                                  {"rig", cfg.rig},
                                  {"extent", cfg.camera_extent},
                                  {"seed", cfg.seed}});
            stage.add_output(stack_path);
            stage.run([&] {
                const TriMesh mesh = load_mesh(cfg.mesh_path);
                double extent = cfg.camera_extent;
                const Eigen::Vector3d center =
                    mesh_center(mesh, extent > 0.0 ? nullptr : &extent);
                const FourierCloud expanded = fourier_expand(mesh.vertices, cfg.fourier_order);
                const FourierCloud dense = densify_surface(
                    mesh, expanded.features, std::max<size_t>(cfg.fourier_points, mesh.vertices.size()),
                    cfg.seed);
                const auto cameras = make_camera_rig(parse_camera_rig(cfg.rig), cfg.fourier_size,
                                                     extent, center);
                if (cameras.size() != 3)
                    throw ConfigError("encode stage needs a 3-view rig (front3)");
                const FourierStack stack = build_fourier_stack(dense, cameras);
                Conv2dWeights weights =
                    cfg.encoder_weights.empty()
                        ? Conv2dWeights::seeded_uniform(
                              cfg.encoder_channels,
                              FourierCloud::feature_length(cfg.fourier_order) + 6, 3, cfg.seed)
                        : Conv2dWeights::from_manifest(
                              WeightManifest::load(cfg.encoder_weights), "encoder");
                const auto encoded = encode_stack(stack, weights);
                save_tensor(stack_to_tensor({encoded[0], encoded[1], encoded[2]}), stack_path);
            });
        }

        // ---- texture encoding
        if (with_network) {
            current_stage = "texture";
            Stage stage("texture", out_dir, logger);
            if (!cfg.image_path.empty()) stage.add_input(cfg.image_path);
            stage.set_params(json{{"channels", cfg.texture_channels},
                                  {"size", cfg.fourier_size},
                                  {"seed", cfg.seed}});
            stage.add_output(texfeat_path);
            stage.run([&] {
                FeatureMap image = cfg.image_path.empty()
                                       ? FeatureMap(3, cfg.fourier_size, cfg.fourier_size)
                                       : load_png(cfg.image_path);
                const TriMesh mesh = load_mesh(cfg.mesh_path);
                double extent = cfg.camera_extent;
                const Eigen::Vector3d center =
                    mesh_center(mesh, extent > 0.0 ? nullptr : &extent);
                const OrthoCamera front = make_look_camera({0.0, 0.0, -1.0}, center, extent,
                                                           image.width());
                const TextureEncoderWeights weights =
                    TextureEncoderWeights::seeded_uniform(cfg.texture_channels, cfg.seed + 7);
                save_tensor(to_tensor(texture_encode(image, plucker_map(front), weights)),
                            texfeat_path);
            });
        }

        // ---- dual reconstruction network
        if (with_network) {
            current_stage = "run";
            Stage stage("run", out_dir, logger);
            stage.add_input(stack_path);
            stage.add_input(texfeat_path);
            if (!cfg.net_weights.empty()) stage.add_input(cfg.net_weights);
            stage.set_params(json{{"base_channels", cfg.unet_base_channels}, {"seed", cfg.seed}});
            stage.add_output(pred_c_path);
            stage.add_output(pred_n_path);
            stage.run([&] {
                const auto views = tensor_to_stack(load_tensor(stack_path));
                FeatureMap geo = views[0];
                for (size_t v = 1; v < views.size(); ++v) geo = concat_channels(geo, views[v]);
                const FeatureMap tex = to_feature_map(load_tensor(texfeat_path));
                const int in_channels = geo.channels() + tex.channels();
                const DualUNetWeights weights =
                    cfg.net_weights.empty()
                        ? DualUNetWeights::seeded_uniform(in_channels, cfg.unet_base_channels,
                                                          Gaussian::kAttributeCount, cfg.seed)
                        : DualUNetWeights::from_manifest(WeightManifest::load(cfg.net_weights));
                const DualUNetResult result = dual_unet_forward(geo, tex, weights);

                const TriMesh mesh = load_mesh(cfg.mesh_path);
                double extent = cfg.camera_extent;
                const Eigen::Vector3d center =
                    mesh_center(mesh, extent > 0.0 ? nullptr : &extent);
                const OrthoCamera front =
                    make_look_camera({0.0, 0.0, -1.0}, center, extent, geo.width());
                save_gaussians_ply(decode_gaussian_map(result.texture_map, front), pred_c_path);
                save_gaussians_ply(decode_gaussian_map(result.normal_map, front), pred_n_path);
            });
        }

        // ---- gaussian-enhanced remeshing
        const std::string remesh_input = !cfg.splat_path.empty()
                                             ? cfg.splat_path
                                             : (with_network ? pred_n_path : "");
        if (!remesh_input.empty()) {
            current_stage = "remesh";
            Stage stage("remesh", out_dir, logger);
            stage.add_input(remesh_input);
            stage.set_params(json{{"views", cfg.remesh_views},
                                  {"size", cfg.remesh_size},
                                  {"iterations", cfg.remesh_iterations},
                                  {"step_size", cfg.remesh_step_size},
                                  {"lambda_normal", cfg.lambda_normal},
                                  {"lambda_mask", cfg.lambda_mask},
                                  {"lambda_lap", cfg.lambda_lap},
                                  {"grid_res", cfg.grid_res},
                                  {"iso_level", cfg.iso_level},
                                  {"stop_tol", cfg.stop_tol},
                                  {"sigma_edge", cfg.sigma_edge}});
            stage.add_output(refined_path);
            stage.add_output(remesh_report_path);
            stage.run([&] {
                const GaussianSet set = load_gaussians_ply(remesh_input);
                RemeshConfig rc;
                rc.iterations = cfg.remesh_iterations;
                rc.step_size = cfg.remesh_step_size;
                rc.lambda_normal = cfg.lambda_normal;
                rc.lambda_mask = cfg.lambda_mask;
                rc.lambda_lap = cfg.lambda_lap;
                rc.grid_res = cfg.grid_res;
                rc.iso_level = cfg.iso_level;
                rc.stop_tol = cfg.stop_tol;
                rc.render.sigma_edge = cfg.sigma_edge;
                Eigen::Vector3d lo, hi;
                gaussian_bounds(set, lo, hi);
                rc.views = ring_views(cfg.remesh_views, cfg.remesh_size,
                                      0.5 * (hi - lo).maxCoeff(), 0.5 * (lo + hi));
                auto [mesh, report] = remesh(set, rc);
                save_mesh(mesh, refined_path);

                json rj;
                rj["iterations"] = json::array();
                for (const auto& it : report.iterations)
                    rj["iterations"].push_back(json{{"normal", it.normal},
                                                    {"mask", it.mask},
                                                    {"lap", it.lap},
                                                    {"total", it.total}});
                rj["wall_ms"] = report.wall_ms;
                rj["verts_before"] = report.verts_before;
                rj["verts_after"] = report.verts_after;
                std::ofstream out(remesh_report_path);
                out << rj.dump(2) << "\n";
            });
        }

        // ---- evaluation
        if (!cfg.gt_mesh_path.empty() && !remesh_input.empty()) {
            current_stage = "eval";
            Stage stage("eval", out_dir, logger);
            stage.add_input(refined_path);
            stage.add_input(cfg.gt_mesh_path);
            stage.set_params(json{{"tau", cfg.metric_tau},
                                  {"samples", cfg.metric_samples},
                                  {"seed", cfg.seed}});
            stage.add_output(report_path);
            stage.run([&] {
                const TriMesh pred = load_mesh(refined_path);
                const TriMesh gt = load_mesh(cfg.gt_mesh_path);
                const GeomReport report =
                    evaluate_geometry(pred, gt, cfg.metric_tau, cfg.metric_samples, cfg.seed);
                json rj;
                rj["cd_p_to_s"] = report.cd_p_to_s;
                rj["cd_s_to_p"] = report.cd_s_to_p;
                rj["nc"] = report.nc;
                rj["fscore"] = report.fscore;
                rj["tau"] = report.tau;
                std::ofstream out(report_path);
                out << rj.dump(2) << "\n";
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "[error] stage=" << current_stage << " error=\"" << e.what() << "\"\n";
        if (current_stage == "encode") return 10;
        if (current_stage == "texture") return 11;
        if (current_stage == "run") return 12;
        if (current_stage == "remesh") return 13;
        if (current_stage == "eval") return 14;
        return 1;
    }
    return 0;
}

} // namespace splatkit
