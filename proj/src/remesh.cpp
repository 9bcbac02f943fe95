#include "splatkit/remesh.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "splatkit/camera_rigs.hpp"
#include "splatkit/parallel.hpp"

namespace splatkit {

void RemeshConfig::validate() const {
    if (iterations < 1) throw ValidationError("remesh: iterations must be >= 1");
    if (!(step_size > 0.0)) throw ValidationError("remesh: step_size must be positive");
    if (grid_res < 8) throw ValidationError("remesh: grid_res must be >= 8");
    if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("remesh: momentum outside [0,1)");
    if (backtracks < 0) throw ValidationError("remesh: backtracks must be >= 0");
    render.validate();
}

void gaussian_bounds(const GaussianSet& set, Eigen::Vector3d& bound_min,
                     Eigen::Vector3d& bound_max, double margin_fraction) {
    if (set.empty()) throw ValidationError("gaussian_bounds: empty set");
    bound_min = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    bound_max = -bound_min;
    for (const Gaussian& g : set.gaussians) {
        const Eigen::Matrix3d cov = covariance(g);
        const Eigen::Vector3d half = 3.0 * cov.diagonal().array().sqrt();
        bound_min = bound_min.cwiseMin(g.center - half);
        bound_max = bound_max.cwiseMax(g.center + half);
    }
    const Eigen::Vector3d margin = margin_fraction * (bound_max - bound_min);
    bound_min -= margin;
    bound_max += margin;
}

ScalarGrid density_field(const GaussianSet& set, int grid_res, const Eigen::Vector3d& bound_min,
                         const Eigen::Vector3d& bound_max) {
    if (set.empty()) throw ValidationError("density_field: empty set");
    if (((bound_max - bound_min).array() <= 0.0).any())
        throw ValidationError("density_field: degenerate bounds");
    set.validate();

    ScalarGrid grid;
    grid.min_corner = bound_min;
    grid.max_corner = bound_max;
    grid.nx = grid.ny = grid.nz = grid_res + 1;
    grid.values.assign(static_cast<size_t>(grid.nx) * grid.ny * grid.nz, 0.0);

    const Eigen::Vector3d extent = bound_max - bound_min;
    const Eigen::Vector3d cell(extent.x() / grid_res, extent.y() / grid_res,
                               extent.z() / grid_res);

    for (const Gaussian& g : set.gaussians) {
        const Eigen::Matrix3d cov = covariance(g);
        const Eigen::Matrix3d inv_cov = cov.inverse();
        const Eigen::Vector3d half = 3.0 * cov.diagonal().array().sqrt();
        // node index range covered by the 3-sigma box
        int lo[3], hi[3];
        bool empty = false;
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::max(0, static_cast<int>(std::ceil(
                                    (g.center[k] - half[k] - bound_min[k]) / cell[k])));
            hi[k] = std::min(grid_res, static_cast<int>(std::floor(
                                           (g.center[k] + half[k] - bound_min[k]) / cell[k])));
            if (lo[k] > hi[k]) empty = true;
        }
        if (empty) continue;
        for (int iz = lo[2]; iz <= hi[2]; ++iz) {
            for (int iy = lo[1]; iy <= hi[1]; ++iy) {
                for (int ix = lo[0]; ix <= hi[0]; ++ix) {
                    const Eigen::Vector3d d = grid.node_position(ix, iy, iz) - g.center;
                    // keep the support truly ellipsoidal-boxed: the box test
                    // above already limits to 3 sigma per axis
                    const double q = d.dot(inv_cov * d);
                    grid.at(ix, iy, iz) += g.opacity * std::exp(-0.5 * q);
                }
            }
        }
    }
    return grid;
}

TriMesh init_coarse_mesh(const GaussianSet& set, const RemeshConfig& config) {
    Eigen::Vector3d bound_min, bound_max;
    gaussian_bounds(set, bound_min, bound_max);
    const ScalarGrid grid = density_field(set, config.grid_res, bound_min, bound_max);
    const double grid_max = grid.max_value();
    const double iso = config.iso_level >= 0.0 ? config.iso_level : 0.3 * grid_max;
    if (iso >= grid_max)
        throw ValidationError("init_coarse_mesh: iso level " + std::to_string(iso) +
                              " is above the grid maximum " + std::to_string(grid_max) +
                              "; try a level below it, e.g. " + std::to_string(0.3 * grid_max));
    TriMesh mesh = largest_component(marching_cubes(grid, iso));
    if (mesh.faces.empty()) throw ValidationError("init_coarse_mesh: empty iso-surface");
    mesh.validate();
    return mesh;
}

namespace {

double laplacian_energy_impl(const TriMesh& mesh,
                             const std::vector<std::vector<int>>& adjacency,
                             std::vector<Eigen::Vector3d>* gradient, int* isolated_count,
                             std::vector<double>* per_vertex) {
    const size_t n = mesh.vertices.size();

    std::vector<Eigen::Vector3d> delta(n, Eigen::Vector3d::Zero());
    size_t counted = 0;
    int isolated = 0;
    for (size_t v = 0; v < n; ++v) {
        if (adjacency[v].empty()) {
            ++isolated;
            continue;
        }
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (int u : adjacency[v]) mean += mesh.vertices[u];
        mean /= static_cast<double>(adjacency[v].size());
        delta[v] = mean - mesh.vertices[v];
        ++counted;
    }
    if (isolated_count) *isolated_count = isolated;
    if (per_vertex) {
        per_vertex->resize(n);
        for (size_t v = 0; v < n; ++v) (*per_vertex)[v] = delta[v].squaredNorm();
    }
    if (counted == 0) {
        if (gradient) gradient->assign(n, Eigen::Vector3d::Zero());
        return 0.0;
    }

    double energy = 0.0;
    for (size_t v = 0; v < n; ++v) energy += delta[v].squaredNorm();
    energy /= static_cast<double>(counted);

    if (gradient) {
        gradient->assign(n, Eigen::Vector3d::Zero());
        const double scale = 2.0 / static_cast<double>(counted);
        for (size_t v = 0; v < n; ++v) {
            if (adjacency[v].empty()) continue;
            (*gradient)[v] -= scale * delta[v];
            const double inv_deg = 1.0 / static_cast<double>(adjacency[v].size());
            for (int u : adjacency[v]) (*gradient)[u] += scale * inv_deg * delta[v];
        }
    }
    return energy;
}

} // namespace

double laplacian_energy(const TriMesh& mesh, std::vector<Eigen::Vector3d>* gradient,
                        int* isolated_count, std::vector<double>* per_vertex) {
    mesh.validate();
    return laplacian_energy_impl(mesh, mesh.vertex_adjacency(), gradient, isolated_count,
                                 per_vertex);
}

ViewLoss evaluate_view(const TriMesh& mesh, const OrthoCamera& view,
                       const FeatureMap& target_normal, const FeatureMap& target_mask,
                       const RemeshConfig& config) {
    const MeshLossGrad lg =
        render_mesh_with_grads(mesh, view, config.render, target_normal, target_mask);
    ViewLoss out;
    out.normal = lg.loss_normal;
    out.mask = lg.loss_mask;
    out.grad.resize(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
        out.grad[v] = config.lambda_normal * lg.grad_normal[v] +
                      config.lambda_mask * lg.grad_mask[v];
    return out;
}

namespace {

struct TotalLoss {
    double normal = 0.0, mask = 0.0, lap = 0.0;
    double total(const RemeshConfig& c) const {
        return c.lambda_normal * normal + c.lambda_mask * mask + c.lambda_lap * lap;
    }
};

// full objective over all views plus the Laplacian term; `adjacency`, when
// given, skips recomputing the one-ring every call (topology is fixed
// throughout refinement)
TotalLoss evaluate_objective(const TriMesh& mesh, const std::vector<OrthoCamera>& views,
                             const std::vector<FeatureMap>& target_normals,
                             const std::vector<FeatureMap>& target_masks,
                             const RemeshConfig& config, std::vector<Eigen::Vector3d>* grad,
                             const std::vector<std::vector<int>>* adjacency = nullptr) {
    TotalLoss loss;
    std::vector<ViewLoss> per_view(views.size());
    parallel_for(0, views.size(), [&](size_t lo, size_t hi) {
        for (size_t v = lo; v < hi; ++v)
            per_view[v] = evaluate_view(mesh, views[v], target_normals[v], target_masks[v], config);
    });
    if (grad) grad->assign(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (size_t v = 0; v < views.size(); ++v) { // fixed-order reduction
        loss.normal += per_view[v].normal;
        loss.mask += per_view[v].mask;
        if (grad)
            for (size_t i = 0; i < mesh.vertices.size(); ++i) (*grad)[i] += per_view[v].grad[i];
    }
    std::vector<Eigen::Vector3d> lap_grad;
    if (adjacency)
        loss.lap = laplacian_energy_impl(mesh, *adjacency, grad ? &lap_grad : nullptr, nullptr,
                                         nullptr);
    else
        loss.lap = laplacian_energy(mesh, grad ? &lap_grad : nullptr);
    if (grad)
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
            (*grad)[i] += config.lambda_lap * lap_grad[i];
    return loss;
}

} // namespace

ObjectiveEval remesh_objective(const TriMesh& mesh,
                               const std::vector<FeatureMap>& target_normals,
                               const std::vector<FeatureMap>& target_masks,
                               const RemeshConfig& config) {
    if (config.views.size() != target_normals.size() ||
        config.views.size() != target_masks.size())
        throw ValidationError("remesh_objective: target count does not match view count");
    ObjectiveEval result;
    const TotalLoss loss = evaluate_objective(mesh, config.views, target_normals, target_masks,
                                              config, &result.grad);
    result.normal = loss.normal;
    result.mask = loss.mask;
    result.lap = loss.lap;
    result.total = loss.total(config);
    return result;
}

std::pair<TriMesh, RemeshReport> refine_mesh(TriMesh mesh,
                                             const std::vector<FeatureMap>& target_normals,
                                             const std::vector<FeatureMap>& target_masks,
                                             const RemeshConfig& config) {
    config.validate();
    if (config.views.empty()) throw ValidationError("refine_mesh: no views configured");
    if (target_normals.size() != config.views.size() ||
        target_masks.size() != config.views.size())
        throw ValidationError("refine_mesh: target count does not match view count");

    const auto t0 = std::chrono::steady_clock::now();

    RemeshReport report;
    report.verts_before = mesh.vertex_count();
    report.faces_before = mesh.face_count();

    const std::vector<std::vector<int>> adjacency = mesh.vertex_adjacency();
    std::vector<Eigen::Vector3d> grad;
    TotalLoss current = evaluate_objective(mesh, config.views, target_normals, target_masks,
                                           config, &grad, &adjacency);
    double current_total = current.total(config);

    std::vector<Eigen::Vector3d> velocity(mesh.vertices.size(), Eigen::Vector3d::Zero());
    double step = config.step_size;
    int slow_streak = 0;

    // displacement cap in scene units, from the first view's pixel pitch
    const double pixel_pitch =
        2.0 * config.views[0].half_width / static_cast<double>(config.views[0].width);
    const double max_move =
        config.max_step_px > 0.0 ? config.max_step_px * pixel_pitch
                                 : std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < config.iterations; ++iter) {
        for (size_t v = 0; v < velocity.size(); ++v)
            velocity[v] = config.momentum * velocity[v] + grad[v];

        RemeshIterationRecord rec;
        for (int attempt = 0;; ++attempt) {
            TriMesh candidate = mesh;
            for (size_t v = 0; v < velocity.size(); ++v) {
                Eigen::Vector3d move = -step * velocity[v];
                const double len = move.norm();
                if (len > max_move) move *= max_move / len;
                candidate.vertices[v] += move;
            }

            std::vector<Eigen::Vector3d> cand_grad;
            const TotalLoss cand = evaluate_objective(candidate, config.views, target_normals,
                                                      target_masks, config, &cand_grad,
                                                      &adjacency);
            const double cand_total = cand.total(config);
            if (!std::isfinite(cand_total))
                throw ValidationError("remesh: non-finite loss at iteration " +
                                      std::to_string(iter));

            if (cand_total <= current_total) {
                const double improvement =
                    current_total > 0.0 ? (current_total - cand_total) / current_total : 0.0;
                slow_streak = improvement < config.stop_tol ? slow_streak + 1 : 0;
                mesh = std::move(candidate);
                grad = std::move(cand_grad);
                current = cand;
                current_total = cand_total;
                rec.accepted = true;
                // let the step recover after good moves, never past its ceiling
                step = std::min(config.step_size, step * 1.3);
                break;
            }
            // loss increased: halve the step, damp the momentum, retry
            step *= 0.5;
            for (auto& v : velocity) v *= 0.5;
            if (attempt >= config.backtracks) {
                rec.accepted = false;
                std::fill(velocity.begin(), velocity.end(), Eigen::Vector3d::Zero());
                break;
            }
        }
        rec.normal = current.normal;
        rec.mask = current.mask;
        rec.lap = current.lap;
        rec.total = current_total;
        report.iterations.push_back(rec);
        if (slow_streak >= 10) break;
    }

    report.final_normal = current.normal;
    report.final_mask = current.mask;
    report.final_lap = current.lap;
    report.final_total = current_total;
    report.iteration_count = static_cast<int>(report.iterations.size());
    report.verts_after = mesh.vertex_count();
    report.faces_after = mesh.face_count();
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               t0)
                         .count();
    return {std::move(mesh), std::move(report)};
}

std::pair<TriMesh, RemeshReport> remesh(const GaussianSet& set, const RemeshConfig& config_in) {
    RemeshConfig config = config_in;
    config.validate();
    if (set.empty()) throw ValidationError("remesh: empty gaussian set");

    const auto t0 = std::chrono::steady_clock::now();

    if (config.views.empty()) {
        Eigen::Vector3d bound_min, bound_max;
        gaussian_bounds(set, bound_min, bound_max);
        const Eigen::Vector3d center = 0.5 * (bound_min + bound_max);
        const double extent = 0.5 * (bound_max - bound_min).maxCoeff();
        config.views = make_camera_rig(CameraRig::Ring8, 512, extent, center);
    }

    // targets rendered once from the normal gaussian avatar
    std::vector<FeatureMap> target_normals, target_masks;
    target_normals.reserve(config.views.size());
    target_masks.reserve(config.views.size());
    for (const auto& view : config.views) {
        RenderOutput target = render_gaussians(set, view, RenderMode::Normal, config.render);
        bool any_coverage = false;
        for (double a : target.alpha.data())
            if (a > 0.5) any_coverage = true;
        if (!any_coverage)
            throw ValidationError("remesh: gaussians render an empty silhouette in a view");
        target_normals.push_back(std::move(target.image));
        target_masks.push_back(std::move(target.alpha));
    }

    TriMesh mesh = init_coarse_mesh(set, config);
    auto [refined, report] = refine_mesh(std::move(mesh), target_normals, target_masks, config);
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(refined), std::move(report)};
}

} // namespace splatkit
