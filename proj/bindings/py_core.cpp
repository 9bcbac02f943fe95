#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splatkit/camera_rigs.hpp"
#include "splatkit/fourier.hpp"
#include "splatkit/image_io.hpp"
#include "splatkit/io.hpp"
#include "splatkit/metrics.hpp"
#include "splatkit/netshell.hpp"
#include "splatkit/parallel.hpp"
#include "splatkit/projection.hpp"
#include "splatkit/raster.hpp"
#include "splatkit/remesh.hpp"

namespace py = pybind11;
using namespace splatkit;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Eigen::Vector3d> to_point_list(const Eigen::Ref<const Points>& array) {
    std::vector<Eigen::Vector3d> points(array.rows());
    for (Eigen::Index i = 0; i < array.rows(); ++i) points[i] = array.row(i).transpose();
    return points;
}

Points from_point_list(const std::vector<Eigen::Vector3d>& points) {
    Points array(points.size(), 3);
    for (size_t i = 0; i < points.size(); ++i) array.row(i) = points[i].transpose();
    return array;
}

TriMesh to_mesh(const Eigen::Ref<const Points>& vertices, const Eigen::Ref<const Faces>& faces) {
    TriMesh mesh;
    mesh.vertices = to_point_list(vertices);
    mesh.faces.resize(faces.rows());
    for (Eigen::Index f = 0; f < faces.rows(); ++f)
        mesh.faces[f] = {faces(f, 0), faces(f, 1), faces(f, 2)};
    mesh.validate();
    return mesh;
}

py::tuple from_mesh(const TriMesh& mesh) {
    Faces faces(mesh.faces.size(), 3);
    for (size_t f = 0; f < mesh.faces.size(); ++f)
        for (int k = 0; k < 3; ++k) faces(static_cast<Eigen::Index>(f), k) = mesh.faces[f][k];
    return py::make_tuple(from_point_list(mesh.vertices), faces);
}

GaussianSet to_gaussians(const py::dict& d) {
    const auto centers = d["centers"].cast<Points>();
    const auto scales = d["scales"].cast<Points>();
    const auto rotations = d["rotations"].cast<Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>>();
    const auto opacities = d["opacities"].cast<Eigen::VectorXd>();
    const auto colors = d["colors"].cast<Points>();
    GaussianSet set;
    set.gaussians.resize(centers.rows());
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        Gaussian& g = set.gaussians[i];
        g.center = centers.row(i).transpose();
        g.scale = scales.row(i).transpose();
        g.rotation = rotations.row(i).transpose();
        g.opacity = opacities[i];
        g.color = colors.row(i).transpose();
    }
    if (d.contains("units")) set.units = d["units"].cast<std::string>();
    set.validate();
    return set;
}

py::dict from_gaussians(const GaussianSet& set) {
    const Eigen::Index n = static_cast<Eigen::Index>(set.size());
    Points centers(n, 3), scales(n, 3), colors(n, 3);
    Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor> rotations(n, 4);
    Eigen::VectorXd opacities(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Gaussian& g = set.gaussians[i];
        centers.row(i) = g.center.transpose();
        scales.row(i) = g.scale.transpose();
        rotations.row(i) = g.rotation.transpose();
        opacities[i] = g.opacity;
        colors.row(i) = g.color.transpose();
    }
    py::dict d;
    d["centers"] = centers;
    d["scales"] = scales;
    d["rotations"] = rotations;
    d["opacities"] = opacities;
    d["colors"] = colors;
    d["units"] = set.units;
    return d;
}

py::array_t<double> from_feature_map(const FeatureMap& map) {
    py::array_t<double> array({map.channels(), map.height(), map.width()});
    std::copy(map.data().begin(), map.data().end(), array.mutable_data());
    return array;
}

FeatureMap to_feature_map_py(const py::array_t<double, py::array::c_style | py::array::forcecast>& array) {
    if (array.ndim() != 3) throw ValidationError("expected a [C,H,W] array");
    FeatureMap map(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)),
                   static_cast<int>(array.shape(2)));
    std::copy(array.data(), array.data() + array.size(), map.data().begin());
    return map;
}

py::dict from_render(const RenderOutput& render) {
    py::dict d;
    d["image"] = from_feature_map(render.image);
    d["alpha"] = from_feature_map(render.alpha);
    d["depth"] = from_feature_map(render.depth);
    return d;
}

SoftRenderConfig render_config(double sigma_edge, double alpha_cutoff) {
    SoftRenderConfig config;
    config.sigma_edge = sigma_edge;
    config.alpha_cutoff = alpha_cutoff;
    return config;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "splatkit core: gaussian-splat rendering, fourier geometry encoding, "
              "gaussian-enhanced remeshing and mesh/image metrics";

    py::register_exception<Error>(m, "SplatkitError");

    py::class_<OrthoCamera>(m, "OrthoCamera")
        .def(py::init<>())
        .def_readwrite("rotation", &OrthoCamera::rotation)
        .def_readwrite("translation", &OrthoCamera::translation)
        .def_readwrite("half_width", &OrthoCamera::half_width)
        .def_readwrite("half_height", &OrthoCamera::half_height)
        .def_readwrite("width", &OrthoCamera::width)
        .def_readwrite("height", &OrthoCamera::height)
        .def_readwrite("near", &OrthoCamera::near)
        .def_readwrite("far", &OrthoCamera::far)
        .def("validate", &OrthoCamera::validate)
        .def("view_direction", &OrthoCamera::view_direction);

    m.def("set_max_threads", &set_max_threads, py::arg("n"));

    m.def(
        "make_camera_rig",
        [](const std::string& name, int size, double extent, const Eigen::Vector3d& center) {
            return make_camera_rig(parse_camera_rig(name), size, extent, center);
        },
        py::arg("rig"), py::arg("size"), py::arg("extent"),
        py::arg("center") = Eigen::Vector3d::Zero(),
        "Camera list for a named rig: 'front3' or 'ring8'.");
    m.def(
        "make_look_camera",
        [](const Eigen::Vector3d& dir, const Eigen::Vector3d& center, double extent, int size) {
            return make_look_camera(dir, center, extent, size);
        },
        py::arg("view_dir"), py::arg("center"), py::arg("extent"), py::arg("size"));

    // ---- I/O
    m.def("load_gaussians_ply",
          [](const std::string& path) { return from_gaussians(load_gaussians_ply(path)); },
          py::arg("path"));
    m.def("save_gaussians_ply",
          [](const py::dict& splat, const std::string& path, bool binary) {
              save_gaussians_ply(to_gaussians(splat), path, binary);
          },
          py::arg("splat"), py::arg("path"), py::arg("binary") = true);
    m.def("load_mesh",
          [](const std::string& path) { return from_mesh(load_mesh(path)); }, py::arg("path"));
    m.def("save_mesh",
          [](const Eigen::Ref<const Points>& vertices, const Eigen::Ref<const Faces>& faces,
             const std::string& path) { save_mesh(to_mesh(vertices, faces), path); },
          py::arg("vertices"), py::arg("faces"), py::arg("path"));
    m.def("load_png", [](const std::string& path) { return from_feature_map(load_png(path)); },
          py::arg("path"));
    m.def("save_png",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
             const std::string& path) { save_png(to_feature_map_py(image), path); },
          py::arg("image"), py::arg("path"));

    // ---- fourier geometry encoding
    m.def(
        "fourier_expand",
        [](const Eigen::Ref<const Points>& points, int order) {
            const FourierCloud cloud = fourier_expand(to_point_list(points), order);
            Eigen::MatrixXd features(cloud.size(), FourierCloud::feature_length(order));
            for (size_t i = 0; i < cloud.size(); ++i)
                features.row(static_cast<Eigen::Index>(i)) = cloud.features[i].transpose();
            return features;
        },
        py::arg("points"), py::arg("order"));
    m.def(
        "densify_surface",
        [](const Eigen::Ref<const Points>& vertices, const Eigen::Ref<const Faces>& faces,
           const Eigen::MatrixXd& features, size_t count, uint64_t seed) {
            const TriMesh mesh = to_mesh(vertices, faces);
            std::vector<Eigen::VectorXd> feature_list(features.rows());
            for (Eigen::Index i = 0; i < features.rows(); ++i)
                feature_list[i] = features.row(i).transpose();
            const FourierCloud cloud = densify_surface(mesh, feature_list, count, seed);
            Eigen::MatrixXd out_features(cloud.size(), features.cols());
            for (size_t i = 0; i < cloud.size(); ++i)
                out_features.row(static_cast<Eigen::Index>(i)) = cloud.features[i].transpose();
            return py::make_tuple(from_point_list(cloud.points), out_features);
        },
        py::arg("vertices"), py::arg("faces"), py::arg("features"), py::arg("count"),
        py::arg("seed") = 0);
    m.def(
        "project_features",
        [](const Eigen::Ref<const Points>& points, const Eigen::MatrixXd& features,
           const OrthoCamera& camera) {
            FourierCloud cloud;
            cloud.points = to_point_list(points);
            cloud.order = static_cast<int>((features.cols() / 3 - 1) / 2);
            cloud.features.resize(features.rows());
            for (Eigen::Index i = 0; i < features.rows(); ++i)
                cloud.features[i] = features.row(i).transpose();
            return from_feature_map(project_features(cloud, camera));
        },
        py::arg("points"), py::arg("features"), py::arg("camera"));
    m.def("plucker_map",
          [](const OrthoCamera& camera) { return from_feature_map(plucker_map(camera)); },
          py::arg("camera"));

    // ---- rendering
    m.def(
        "render_gaussians",
        [](const py::dict& splat, const OrthoCamera& camera, const std::string& mode,
           double sigma_edge, double alpha_cutoff) {
            const RenderMode render_mode =
                mode == "normal" ? RenderMode::Normal : RenderMode::Color;
            return from_render(render_gaussians(to_gaussians(splat), camera, render_mode,
                                                render_config(sigma_edge, alpha_cutoff)));
        },
        py::arg("splat"), py::arg("camera"), py::arg("mode") = "color",
        py::arg("sigma_edge") = 1.0, py::arg("alpha_cutoff") = 1.0 / 255.0);
    m.def(
        "render_mesh",
        [](const Eigen::Ref<const Points>& vertices, const Eigen::Ref<const Faces>& faces,
           const OrthoCamera& camera, double sigma_edge) {
            return from_render(
                render_mesh(to_mesh(vertices, faces), camera, render_config(sigma_edge, 1e-3)));
        },
        py::arg("vertices"), py::arg("faces"), py::arg("camera"), py::arg("sigma_edge") = 1.0);

    // ---- remeshing
    m.def(
        "remesh",
        [](const py::dict& splat, int views, int size, int iterations, double step_size,
           double lambda_normal, double lambda_mask, double lambda_lap, int grid_res,
           double iso_level, double sigma_edge) {
            const GaussianSet set = to_gaussians(splat);
            RemeshConfig config;
            config.iterations = iterations;
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
                config.views.push_back(make_look_camera(
                    {-std::sin(azimuth), 0.0, -std::cos(azimuth)}, center, extent, size));
            }
            auto [mesh, report] = remesh(set, config);
            py::list iteration_list;
            for (const auto& it : report.iterations) {
                py::dict entry;
                entry["normal"] = it.normal;
                entry["mask"] = it.mask;
                entry["lap"] = it.lap;
                entry["total"] = it.total;
                entry["accepted"] = it.accepted;
                iteration_list.append(entry);
            }
            py::dict report_dict;
            report_dict["iterations"] = iteration_list;
            report_dict["wall_ms"] = report.wall_ms;
            report_dict["verts_before"] = report.verts_before;
            report_dict["verts_after"] = report.verts_after;
            auto [vertices, faces_out] = from_mesh(mesh).cast<std::pair<Points, Faces>>();
            return py::make_tuple(vertices, faces_out, report_dict);
        },
        py::arg("splat"), py::arg("views") = 8, py::arg("size") = 512,
        py::arg("iterations") = 200, py::arg("step_size") = 1.0, py::arg("lambda_normal") = 1.0,
        py::arg("lambda_mask") = 1.0, py::arg("lambda_lap") = 1.0, py::arg("grid_res") = 64,
        py::arg("iso_level") = -1.0, py::arg("sigma_edge") = 1.0);
    m.def(
        "init_coarse_mesh",
        [](const py::dict& splat, int grid_res, double iso_level) {
            RemeshConfig config;
            config.grid_res = grid_res;
            config.iso_level = iso_level;
            return from_mesh(init_coarse_mesh(to_gaussians(splat), config));
        },
        py::arg("splat"), py::arg("grid_res") = 64, py::arg("iso_level") = -1.0);

    // ---- metrics
    m.def(
        "chamfer",
        [](const Eigen::Ref<const Points>& a, const Eigen::Ref<const Points>& b) {
            return chamfer(to_point_list(a), to_point_list(b));
        },
        py::arg("pred"), py::arg("gt"));
    m.def(
        "f_score",
        [](const Eigen::Ref<const Points>& a, const Eigen::Ref<const Points>& b, double tau) {
            return f_score(to_point_list(a), to_point_list(b), tau);
        },
        py::arg("pred"), py::arg("gt"), py::arg("tau"));
    m.def(
        "normal_consistency",
        [](const Eigen::Ref<const Points>& pred_v, const Eigen::Ref<const Faces>& pred_f,
           const Eigen::Ref<const Points>& gt_v, const Eigen::Ref<const Faces>& gt_f,
           size_t samples, uint64_t seed) {
            return normal_consistency(to_mesh(pred_v, pred_f), to_mesh(gt_v, gt_f), samples, seed);
        },
        py::arg("pred_vertices"), py::arg("pred_faces"), py::arg("gt_vertices"),
        py::arg("gt_faces"), py::arg("samples") = 100000, py::arg("seed") = 0);
    m.def(
        "psnr",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b, double peak) {
            return psnr(to_feature_map_py(a), to_feature_map_py(b), peak);
        },
        py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);
    m.def(
        "ssim",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return ssim(to_feature_map_py(a), to_feature_map_py(b));
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "sample_surface",
        [](const Eigen::Ref<const Points>& vertices, const Eigen::Ref<const Faces>& faces,
           size_t count, uint64_t seed) {
            const SurfaceSamples samples = sample_surface(to_mesh(vertices, faces), count, seed);
            return py::make_tuple(from_point_list(samples.points),
                                  from_point_list(samples.normals));
        },
        py::arg("vertices"), py::arg("faces"), py::arg("count"), py::arg("seed") = 0);
}
