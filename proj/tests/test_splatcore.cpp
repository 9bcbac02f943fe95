#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "splatkit/camera.hpp"
#include "splatkit/io.hpp"
#include "splatkit/metrics.hpp"
#include "test_support.hpp"

using namespace splatkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "splatkit_splatcore_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("gaussian validation enforces the attribute invariants") {
    Gaussian g;
    CHECK_NOTHROW(g.validate());
    CHECK(Gaussian::kAttributeCount == 14);

    Gaussian bad_scale = g;
    bad_scale.scale.y() = 0.0;
    CHECK_THROWS_AS(bad_scale.validate(), ValidationError);

    Gaussian bad_quat = g;
    bad_quat.rotation = {1.0, 0.1, 0.0, 0.0};
    CHECK_THROWS_AS(bad_quat.validate(), ValidationError);

    Gaussian bad_opacity = g;
    bad_opacity.opacity = 1.5;
    CHECK_THROWS_AS(bad_opacity.validate(), ValidationError);

    Gaussian bad_color = g;
    bad_color.color.z() = -0.2;
    CHECK_THROWS_AS(bad_color.validate(), ValidationError);
}

TEST_CASE("quaternion_to_rotmat hand cases") {
    const Eigen::Matrix3d identity = quaternion_to_rotmat({1.0, 0.0, 0.0, 0.0});
    CHECK((identity - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));

    // 180 degrees about x
    const Eigen::Matrix3d half_turn = quaternion_to_rotmat({0.0, 1.0, 0.0, 0.0});
    Eigen::Matrix3d expected = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
    CHECK((half_turn - expected).norm() == doctest::Approx(0.0));

    CHECK_THROWS_AS(quaternion_to_rotmat({0.9, 0.0, 0.0, 0.0}), ValidationError);
}

TEST_CASE("quaternion_to_rotmat produces orthonormal right-handed matrices") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        const Eigen::Matrix3d r = quaternion_to_rotmat(q);
        CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("covariance matches scale squares under identity rotation") {
    Gaussian g;
    g.scale = {1.0, 2.0, 3.0};
    const Eigen::Matrix3d cov = covariance(g);
    Eigen::Matrix3d expected = Eigen::Vector3d(1.0, 4.0, 9.0).asDiagonal();
    CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance is symmetric and has eigenvalues equal to scale squares") {
    auto set = testing::make_random_gaussians(50, 11);
    for (const auto& g : set.gaussians) {
        const Eigen::Matrix3d cov = covariance(g);
        CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        Eigen::Vector3d expected = g.scale.array().square();
        std::sort(expected.data(), expected.data() + 3);
        CHECK((eig.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("covariance is rotation-equivariant") {
    auto set = testing::make_random_gaussians(20, 13);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (const auto& g : set.gaussians) {
        Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        const Eigen::Matrix3d r = quaternion_to_rotmat(q);
        const Eigen::Matrix3d lhs = covariance(rotate(g, r));
        const Eigen::Matrix3d rhs = r * covariance(g) * r.transpose();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gaussian ply: raw zeros activate to unit scale and half opacity") {
    const fs::path path = temp_dir() / "raw_zero.ply";
    {
        std::ofstream out(path);
        out << "ply\nformat ascii 1.0\nelement vertex 1\n";
        for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                                 "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                                 "rot_3"})
            out << "property float " << name << "\n";
        out << "end_header\n";
        out << "0 0 0 0.5 0.5 0.5 0 0 0 0 1 0 0 0\n";
    }
    const GaussianSet set = load_gaussians_ply(path.string());
    REQUIRE(set.size() == 1);
    CHECK(set.gaussians[0].scale.isApprox(Eigen::Vector3d::Ones(), 1e-12));
    CHECK(set.gaussians[0].opacity == doctest::Approx(0.5));
}

TEST_CASE("gaussian ply: missing attribute is a format error naming it") {
    const fs::path path = temp_dir() / "missing_rot3.ply";
    {
        std::ofstream out(path);
        out << "ply\nformat ascii 1.0\nelement vertex 1\n";
        for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                                 "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2"})
            out << "property float " << name << "\n";
        out << "end_header\n";
        out << "0 0 0 0 0 0 0 0 0 0 1 0 0\n";
    }
    CHECK_THROWS_WITH_AS(load_gaussians_ply(path.string()),
                         doctest::Contains("missing attribute rot_3"), FormatError);
}

TEST_CASE("gaussian ply: NaN field is a validation error with the element index") {
    const fs::path path = temp_dir() / "nan_field.ply";
    {
        std::ofstream out(path, std::ios::binary);
        out << "ply\nformat binary_little_endian 1.0\nelement vertex 2\n";
        for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                                 "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                                 "rot_3"})
            out << "property float " << name << "\n";
        out << "end_header\n";
        const float rows[2][14] = {
            {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0},
            {0, std::numeric_limits<float>::quiet_NaN(), 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0}};
        out.write(reinterpret_cast<const char*>(rows), sizeof(rows));
    }
    CHECK_THROWS_WITH_AS(load_gaussians_ply(path.string()), doctest::Contains("element 1"),
                         ValidationError);
}

TEST_CASE("gaussian ply round-trip preserves all fields within 1e-6") {
    const GaussianSet original = testing::make_random_gaussians(100, 42);
    for (const bool binary : {true, false}) {
        const fs::path path = temp_dir() / (binary ? "rt_bin.ply" : "rt_ascii.ply");
        save_gaussians_ply(original, path.string(), binary);
        const GaussianSet loaded = load_gaussians_ply(path.string());
        REQUIRE(loaded.size() == original.size());
        for (size_t i = 0; i < loaded.size(); ++i) {
            const Gaussian& a = original.gaussians[i];
            const Gaussian& b = loaded.gaussians[i];
            CHECK((a.center - b.center).cwiseAbs().maxCoeff() < 1e-6);
            CHECK((a.scale - b.scale).cwiseAbs().maxCoeff() < 1e-6);
            // saved quaternions may flip sign through normalization; compare up to sign
            const double qdot = std::abs(a.rotation.dot(b.rotation));
            CHECK(qdot == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(a.opacity == doctest::Approx(b.opacity).epsilon(1e-6));
            CHECK((a.color - b.color).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("gaussian ply: saving writes exactly the 14 community properties") {
    const fs::path path = temp_dir() / "props.ply";
    save_gaussians_ply(testing::make_random_gaussians(3, 1), path.string());
    std::ifstream in(path.string(), std::ios::binary);
    std::string line;
    int property_count = 0;
    while (std::getline(in, line) && line != "end_header")
        if (line.rfind("property", 0) == 0) ++property_count;
    CHECK(property_count == 14);
}

TEST_CASE("gaussian ply: empty set save is an error") {
    CHECK_THROWS_WITH_AS(save_gaussians_ply(GaussianSet{}, (temp_dir() / "x.ply").string()),
                         doctest::Contains("empty gaussian set"), ValidationError);
}

TEST_CASE("gaussian ply: sphere fixture header is stable") {
    const fs::path path = temp_dir() / "sphere_header.ply";
    save_gaussians_ply(testing::make_sphere_gaussians(16, 1.0, 0.05, 0.01, 0.9), path.string());
    std::ifstream in(path.string(), std::ios::binary);
    std::string header, line;
    while (std::getline(in, line) && line != "end_header") header += line + "\n";
    const std::string expected =
        "ply\n"
        "format binary_little_endian 1.0\n"
        "element vertex 16\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float f_dc_0\nproperty float f_dc_1\nproperty float f_dc_2\n"
        "property float opacity\n"
        "property float scale_0\nproperty float scale_1\nproperty float scale_2\n"
        "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n";
    CHECK(header == expected);
}

TEST_CASE("mesh obj: unit cube loads with 8 vertices and 12 faces") {
    const fs::path path = temp_dir() / "cube.obj";
    save_mesh(testing::make_cube(), path.string());
    const TriMesh cube = load_mesh(path.string());
    CHECK(cube.vertex_count() == 8);
    CHECK(cube.face_count() == 12);
}

TEST_CASE("mesh round-trip: positions within 1e-6; obj round-trip has chamfer exactly 0") {
    const TriMesh sphere = testing::make_icosphere(2);
    for (const char* name : {"rt.obj", "rt.ply"}) {
        const fs::path path = temp_dir() / name;
        save_mesh(sphere, path.string());
        const TriMesh loaded = load_mesh(path.string());
        REQUIRE(loaded.vertex_count() == sphere.vertex_count());
        REQUIRE(loaded.face_count() == sphere.face_count());
        for (size_t v = 0; v < loaded.vertex_count(); ++v)
            CHECK((loaded.vertices[v] - sphere.vertices[v]).cwiseAbs().maxCoeff() < 1e-6);
    }
    // obj stores full decimal precision, so the metric oracle sees identity
    const TriMesh obj_loaded = load_mesh((temp_dir() / "rt.obj").string());
    const auto [fwd, back] = chamfer(obj_loaded.vertices, sphere.vertices);
    CHECK(fwd == 0.0);
    CHECK(back == 0.0);
}

TEST_CASE("mesh obj: malformed face line reports the line number") {
    const fs::path path = temp_dir() / "bad_face.obj";
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\n";
        out << "f 1 2 oops\n";
    }
    CHECK_THROWS_WITH_AS(load_mesh(path.string()), doctest::Contains(":4"), FormatError);
}

TEST_CASE("mesh: face index out of range is a validation error") {
    const fs::path path = temp_dir() / "oob.obj";
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
    }
    CHECK_THROWS_AS(load_mesh(path.string()), ValidationError);
}

TEST_CASE("mesh: degenerate face is rejected at load") {
    const fs::path path = temp_dir() / "degen.obj";
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 2\n";
    }
    CHECK_THROWS_AS(load_mesh(path.string()), ValidationError);
}

TEST_CASE("face normals: cross-product convention, zero-area flagged not NaN") {
    TriMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
    mesh.faces = {{0, 1, 2}, {0, 1, 3}}; // second face is collinear
    int zero_area = -1;
    const auto normals = mesh.face_normals(&zero_area);
    CHECK(normals[0].isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
    CHECK(zero_area == 1);
    CHECK(normals[1].norm() == 0.0);
    CHECK(normals[1].allFinite());
}

TEST_CASE("camera validation") {
    OrthoCamera camera;
    camera.width = 4;
    camera.height = 4;
    CHECK_NOTHROW(camera.validate());
    camera.rotation(0, 0) = 2.0;
    CHECK_THROWS_AS(camera.validate(), ValidationError);
}

TEST_CASE("feature map: concat and finite validation") {
    FeatureMap a(2, 3, 4, 1.0), b(3, 3, 4, 2.0);
    const FeatureMap c = concat_channels(a, b);
    CHECK(c.channels() == 5);
    CHECK(c.at(1, 2, 3) == 1.0);
    CHECK(c.at(2, 0, 0) == 2.0);
    FeatureMap bad(1, 1, 1);
    bad.data()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate_finite(), ValidationError);
}

#include "splatkit/image_io.hpp"
#include "splatkit/tensor_io.hpp"

TEST_CASE("tensor file round-trip preserves shape and float32 payload") {
    Tensor t;
    t.shape = {2, 3, 4, 5};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    t.values.resize(t.element_count());
    for (auto& v : t.values) v = uni(rng);
    const fs::path path = temp_dir() / "tensor.skt";
    save_tensor(t, path.string());
    const Tensor back = load_tensor(path.string());
    CHECK(back.shape == t.shape);
    REQUIRE(back.values.size() == t.values.size());
    for (size_t i = 0; i < t.values.size(); ++i)
        CHECK(back.values[i] == doctest::Approx(t.values[i]).epsilon(1e-6));
    CHECK_THROWS_AS(load_tensor((temp_dir() / "missing.skt").string()), IoError);
}

TEST_CASE("png round-trip is exact up to 8-bit quantization") {
    FeatureMap rgb(3, 9, 13);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : rgb.data()) v = uni(rng);
    const fs::path path = temp_dir() / "roundtrip.png";
    save_png(rgb, path.string());
    const FeatureMap back = load_png(path.string());
    REQUIRE(back.same_shape(rgb));
    for (size_t i = 0; i < rgb.data().size(); ++i)
        CHECK(std::abs(back.data()[i] - rgb.data()[i]) <= 0.5 / 255.0 + 1e-12);

    FeatureMap gray(1, 5, 5, 0.25);
    save_png(gray, path.string());
    CHECK(load_png(path.string()).channels() == 1);
}
