#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "splatkit/camera_rigs.hpp"
#include "splatkit/parallel.hpp"
#include "splatkit/raster.hpp"
#include "test_support.hpp"

using namespace splatkit;

namespace {

OrthoCamera front_camera(int size, double extent = 1.3) {
    return make_look_camera({0, 0, -1}, Eigen::Vector3d::Zero(), extent, size);
}

/// 20-vertex closed mesh: icosahedron with 8 faces split at their centroid,
/// centroids pushed onto the unit sphere. Rotated off the icosahedral
/// symmetry axes so no face is exactly edge-on under the test cameras (an
/// edge-on face makes the silhouette distance genuinely non-differentiable).
TriMesh make_blob20() {
    TriMesh mesh = testing::make_icosphere(0);
    std::vector<std::array<int, 3>> faces(mesh.faces.begin() + 8, mesh.faces.end());
    for (int f = 0; f < 8; ++f) {
        const auto face = mesh.faces[f];
        const int c = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(((mesh.vertices[face[0]] + mesh.vertices[face[1]] +
                                  mesh.vertices[face[2]]) / 3.0).normalized());
        faces.push_back({face[0], face[1], c});
        faces.push_back({face[1], face[2], c});
        faces.push_back({face[2], face[0], c});
    }
    mesh.faces = std::move(faces);
    const Eigen::Matrix3d tilt =
        Eigen::AngleAxisd(0.31, Eigen::Vector3d(0.27, 0.8, 0.53).normalized()).toRotationMatrix();
    for (auto& v : mesh.vertices) v = tilt * v;
    return mesh;
}

} // namespace

TEST_CASE("soft render config validation") {
    SoftRenderConfig config;
    CHECK_NOTHROW(config.validate());
    config.sigma_edge = 0.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config = {};
    config.alpha_cutoff = 1.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("render_gaussians: single centered gaussian is radially non-increasing") {
    GaussianSet set;
    Gaussian g;
    g.scale = Eigen::Vector3d::Constant(0.25);
    g.opacity = 1.0;
    g.color = {1.0, 0.0, 0.0};
    set.gaussians = {g};
    const OrthoCamera camera = front_camera(33, 1.0);
    const RenderOutput out = render_gaussians(set, camera);

    struct Sample {
        double radius, alpha;
    };
    std::vector<Sample> samples;
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 33; ++x)
            samples.push_back({std::hypot(x - 16.0, y - 16.0), out.alpha.at(0, y, x)});
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.radius < b.radius; });
    CHECK(samples.front().alpha == doctest::Approx(1.0));
    for (size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].radius > samples[i - 1].radius + 1e-9)
            CHECK(samples[i].alpha <= samples[i - 1].alpha + 1e-12);
    }
}

TEST_CASE("render_gaussians: empty region has alpha 0, image 0, depth +inf") {
    GaussianSet set;
    Gaussian g;
    g.center = {0.8, 0.8, 0.0};
    g.scale = Eigen::Vector3d::Constant(0.01);
    set.gaussians = {g};
    const OrthoCamera camera = front_camera(32, 1.0);
    const RenderOutput out = render_gaussians(set, camera);
    CHECK(out.alpha.at(0, 16, 2) == 0.0);
    for (int c = 0; c < 3; ++c) CHECK(out.image.at(c, 16, 2) == 0.0);
    CHECK(std::isinf(out.depth.at(0, 16, 2)));
    // depth is finite exactly where alpha > 0
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            CHECK((out.alpha.at(0, y, x) > 0.0) == std::isfinite(out.depth.at(0, y, x)));
}

TEST_CASE("render_gaussians: opaque front gaussian fully occludes") {
    GaussianSet set;
    Gaussian front;
    front.center = {0.0, 0.0, 0.5};
    front.scale = Eigen::Vector3d::Constant(0.2);
    front.opacity = 1.0;
    front.color = {1.0, 0.0, 0.0};
    Gaussian back = front;
    back.center = {0.0, 0.0, -0.5};
    back.color = {0.0, 1.0, 0.0};
    set.gaussians = {back, front}; // input order is depth-agnostic
    const OrthoCamera camera = front_camera(33, 1.0);
    const RenderOutput out = render_gaussians(set, camera);
    CHECK(out.image.at(0, 16, 16) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(out.image.at(1, 16, 16) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(out.depth.at(0, 16, 16) == doctest::Approx(camera.depth_of(front.center)));
}

TEST_CASE("render_gaussians: permutation of the input is bit-identical") {
    GaussianSet set = testing::make_random_gaussians(60, 17);
    // force distinct depths
    for (size_t i = 0; i < set.size(); ++i) set.gaussians[i].center.z() = 0.01 * i - 0.3;
    GaussianSet shuffled = set;
    std::mt19937_64 rng(4);
    std::shuffle(shuffled.gaussians.begin(), shuffled.gaussians.end(), rng);

    const OrthoCamera camera = front_camera(48, 1.5);
    const RenderOutput a = render_gaussians(set, camera);
    const RenderOutput b = render_gaussians(shuffled, camera);
    CHECK(a.image.data() == b.image.data());
    CHECK(a.alpha.data() == b.alpha.data());
    CHECK(a.depth.data() == b.depth.data());
}

TEST_CASE("render_gaussians: compositing weights sum to alpha <= 1") {
    GaussianSet set = testing::make_random_gaussians(80, 23);
    const OrthoCamera camera = front_camera(48, 1.5);
    for (const auto mode : {RenderMode::Color, RenderMode::Normal}) {
        const RenderOutput out = render_gaussians(set, camera, mode);
        for (double a : out.alpha.data()) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0 + 1e-12);
        }
        for (double v : out.image.data()) {
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("render_gaussians: rotating scene and camera together changes nothing") {
    const GaussianSet set = testing::make_random_gaussians(40, 29);
    const OrthoCamera camera = front_camera(32, 1.5);
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.3, 1.0, -0.2).normalized()).toRotationMatrix();

    GaussianSet rotated = set;
    for (auto& g : rotated.gaussians) g = rotate(g, r);
    OrthoCamera rotated_camera = camera;
    rotated_camera.rotation = camera.rotation * r.transpose();

    const RenderOutput a = render_gaussians(set, camera);
    const RenderOutput b = render_gaussians(rotated, rotated_camera);
    for (size_t i = 0; i < a.image.data().size(); ++i)
        CHECK(a.image.data()[i] == doctest::Approx(b.image.data()[i]).epsilon(1e-5));
    for (size_t i = 0; i < a.alpha.data().size(); ++i)
        CHECK(a.alpha.data()[i] == doctest::Approx(b.alpha.data()[i]).epsilon(1e-5));
}

TEST_CASE("render_gaussians: normal mode renormalizes composited normals") {
    GaussianSet set;
    Gaussian g;
    g.scale = Eigen::Vector3d::Constant(0.3);
    g.opacity = 0.9;
    g.color = 0.5 * (Eigen::Vector3d(0, 0, 1) + Eigen::Vector3d::Ones()); // +z normal
    set.gaussians = {g};
    const OrthoCamera camera = front_camera(33, 1.0);
    const RenderOutput out = render_gaussians(set, camera, RenderMode::Normal);
    Eigen::Vector3d n;
    for (int c = 0; c < 3; ++c) n[c] = 2.0 * out.image.at(c, 16, 16) - 1.0;
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(n.z() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("render_gaussians rejects empty sets") {
    CHECK_THROWS_AS(render_gaussians(GaussianSet{}, front_camera(8)), ValidationError);
}

TEST_CASE("render_mesh: front-facing full-frame triangle maps +z normal to (.5,.5,1)") {
    TriMesh tri;
    tri.vertices = {{-10, -10, 0}, {10, -10, 0}, {0, 10, 0}};
    tri.faces = {{0, 1, 2}};
    const OrthoCamera camera = front_camera(16, 1.0);
    const RenderOutput out = render_mesh(tri, camera, {});
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(out.image.at(0, y, x) == doctest::Approx(0.5));
            CHECK(out.image.at(1, y, x) == doctest::Approx(0.5));
            CHECK(out.image.at(2, y, x) == doctest::Approx(1.0));
            CHECK(out.alpha.at(0, y, x) > 0.99);
        }
}

TEST_CASE("render_mesh: soft silhouette saturates and decays") {
    const TriMesh sphere = testing::make_icosphere(3);
    SoftRenderConfig config;
    config.sigma_edge = 1.0;
    const OrthoCamera camera = front_camera(64, 2.0); // sphere covers the middle quarter
    const RenderOutput out = render_mesh(sphere, camera, config);

    // far outside the silhouette: alpha below 1e-4; deep inside: above 1 - 1e-4
    CHECK(out.alpha.at(0, 1, 1) < 1e-4);
    CHECK(out.alpha.at(0, 32, 32) > 1.0 - 1e-4);
    // boundary pixels are genuinely soft
    int soft_count = 0;
    for (double a : out.alpha.data())
        if (a > 0.1 && a < 0.9) ++soft_count;
    CHECK(soft_count > 20);
}

TEST_CASE("render_mesh: sphere mask area within 2% of the analytic disk") {
    const TriMesh sphere = testing::make_icosphere(3);
    const OrthoCamera camera = front_camera(64, 1.3);
    const RenderOutput out = render_mesh(sphere, camera, {});
    size_t covered = 0;
    for (double a : out.alpha.data())
        if (a > 0.5) ++covered;
    const double radius_px = 64.0 / (2.0 * 1.3);
    const double disk = EIGEN_PI * radius_px * radius_px;
    CHECK(static_cast<double>(covered) == doctest::Approx(disk).epsilon(0.02));
}

TEST_CASE("render_mesh: soft silhouette converges monotonically to the hard mask") {
    const TriMesh sphere = testing::make_icosphere(2);
    const OrthoCamera camera = front_camera(48, 1.3);
    const RenderOutput hard_ref = render_mesh(sphere, camera, {});
    std::vector<double> hard(hard_ref.alpha.data().size());
    for (size_t i = 0; i < hard.size(); ++i)
        hard[i] = std::isfinite(hard_ref.depth.data()[i]) ? 1.0 : 0.0;

    double previous = std::numeric_limits<double>::infinity();
    for (const double sigma : {2.0, 1.0, 0.5, 0.25}) {
        SoftRenderConfig config;
        config.sigma_edge = sigma;
        const RenderOutput out = render_mesh(sphere, camera, config);
        double l1 = 0.0;
        for (size_t i = 0; i < hard.size(); ++i) l1 += std::abs(out.alpha.data()[i] - hard[i]);
        CHECK(l1 < previous);
        previous = l1;
    }
}

TEST_CASE("render_mesh rejects zero-area faces") {
    TriMesh bad;
    bad.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    bad.faces = {{0, 1, 2}};
    CHECK_THROWS_AS(render_mesh(bad, front_camera(8), {}), ValidationError);
}

TEST_CASE("render_mesh_with_grads: self-supervision is a fixed point") {
    const TriMesh mesh = make_blob20();
    const OrthoCamera camera = front_camera(32);
    SoftRenderConfig config;
    config.sigma_edge = 1.0;
    const RenderOutput target = render_mesh(mesh, camera, config);
    const MeshLossGrad lg =
        render_mesh_with_grads(mesh, camera, config, target.image, target.alpha);
    CHECK(lg.loss_normal < 1e-8);
    CHECK(lg.loss_mask < 1e-8);
    double grad_norm = 0.0;
    for (const auto& g : lg.grad_normal) grad_norm += g.squaredNorm();
    for (const auto& g : lg.grad_mask) grad_norm += g.squaredNorm();
    CHECK(std::sqrt(grad_norm) < 1e-6);
}

TEST_CASE("render_mesh_with_grads: analytic gradient matches finite differences") {
    TriMesh mesh = make_blob20();
    const OrthoCamera camera = front_camera(32);
    SoftRenderConfig config;
    config.sigma_edge = 1.0;

    // target: the same blob scaled up, so both losses are active
    TriMesh target_mesh = mesh;
    for (auto& v : target_mesh.vertices) v *= 1.06;
    const RenderOutput target = render_mesh(target_mesh, camera, config);

    const MeshLossGrad lg =
        render_mesh_with_grads(mesh, camera, config, target.image, target.alpha);
    CHECK(lg.loss_normal > 1e-5);
    CHECK(lg.loss_mask > 1e-6);

    // central differences, excluding coordinates where the +-h evaluations
    // disagree on visibility (support membership or pixel-face assignment)
    const double h = 1e-4;
    int checked = 0, skipped = 0;
    for (size_t v = 0; v < mesh.vertices.size(); v += 3) { // subsample vertices
        for (int k = 0; k < 3; ++k) {
            auto eval = [&](double delta) {
                TriMesh perturbed = mesh;
                perturbed.vertices[v][k] += delta;
                return render_mesh_with_grads(perturbed, camera, config, target.image,
                                              target.alpha);
            };
            const MeshLossGrad plus = eval(h);
            const MeshLossGrad minus = eval(-h);

            bool visibility_flip = false;
            for (size_t px = 0; px < plus.render.alpha.data().size() && !visibility_flip; ++px) {
                const bool sp = plus.render.alpha.data()[px] > 0.5 && target.alpha.data()[px] > 0.5;
                const bool sm =
                    minus.render.alpha.data()[px] > 0.5 && target.alpha.data()[px] > 0.5;
                if (sp != sm) visibility_flip = true;
                if (sp && sm) {
                    for (int c = 0; c < 3; ++c) {
                        const size_t idx = static_cast<size_t>(c) * plus.render.alpha.data().size() + px;
                        if (std::abs(plus.render.image.data()[idx] -
                                     minus.render.image.data()[idx]) > 0.01)
                            visibility_flip = true; // covering face changed
                    }
                }
            }
            if (visibility_flip) {
                ++skipped;
                continue;
            }

            const double fd_normal = (plus.loss_normal - minus.loss_normal) / (2.0 * h);
            const double fd_mask = (plus.loss_mask - minus.loss_mask) / (2.0 * h);
            const double an_normal = lg.grad_normal[v][k];
            const double an_mask = lg.grad_mask[v][k];
            CHECK(std::abs(an_normal - fd_normal) <=
                  1e-3 * std::max({std::abs(an_normal), std::abs(fd_normal), 1e-7}));
            CHECK(std::abs(an_mask - fd_mask) <=
                  1e-3 * std::max({std::abs(an_mask), std::abs(fd_mask), 1e-7}));
            ++checked;
        }
    }
    CHECK(checked >= 15);       // most coordinates are clean
    CHECK(skipped <= checked);  // flips are the exception, not the rule
}

TEST_CASE("render_mesh_with_grads: growing toward a larger target shrinks the mask loss") {
    const TriMesh mesh = testing::make_icosphere(1, 0.8);
    TriMesh target_mesh = testing::make_icosphere(1, 1.0);
    const OrthoCamera camera = front_camera(48);
    SoftRenderConfig config;
    config.sigma_edge = 1.5;
    const RenderOutput target = render_mesh(target_mesh, camera, config);
    const MeshLossGrad lg =
        render_mesh_with_grads(mesh, camera, config, target.image, target.alpha);
    // directional derivative along uniform outward scaling must be negative
    double directional = 0.0;
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
        directional += lg.grad_mask[v].dot(mesh.vertices[v]);
    CHECK(directional < 0.0);
}

TEST_CASE("render_mesh_with_grads rejects resolution mismatches") {
    const TriMesh mesh = testing::make_icosphere(1);
    const OrthoCamera camera = front_camera(16);
    FeatureMap wrong_normal(3, 8, 8), wrong_mask(1, 8, 8);
    CHECK_THROWS_AS(render_mesh_with_grads(mesh, camera, {}, wrong_normal, wrong_mask),
                    ValidationError);
}

TEST_CASE("render_gaussians: singular projected covariances are clamped and counted") {
    GaussianSet set;
    Gaussian flat;
    flat.scale = {1e-7, 0.4, 1e-7}; // degenerate footprint in the image plane
    flat.opacity = 0.8;
    set.gaussians = {flat};
    const OrthoCamera camera = front_camera(16, 1.0);
    const RenderOutput out = render_gaussians(set, camera);
    CHECK(out.clamped_covariances == 1);
    for (double a : out.alpha.data()) CHECK(std::isfinite(a));
}

TEST_CASE("thread count does not change any rendered bit") {
    const GaussianSet set = testing::make_random_gaussians(60, 41);
    const TriMesh mesh = testing::make_icosphere(2);
    const OrthoCamera camera = front_camera(48, 1.5);

    set_max_threads(1);
    const RenderOutput splat_single = render_gaussians(set, camera);
    const RenderOutput mesh_single = render_mesh(mesh, camera, {});
    set_max_threads(4);
    const RenderOutput splat_multi = render_gaussians(set, camera);
    const RenderOutput mesh_multi = render_mesh(mesh, camera, {});
    set_max_threads(0);

    CHECK(splat_single.image.data() == splat_multi.image.data());
    CHECK(splat_single.alpha.data() == splat_multi.alpha.data());
    CHECK(splat_single.depth.data() == splat_multi.depth.data());
    CHECK(mesh_single.image.data() == mesh_multi.image.data());
    CHECK(mesh_single.alpha.data() == mesh_multi.alpha.data());
}
