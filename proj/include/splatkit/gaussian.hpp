#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splatkit/errors.hpp"

namespace splatkit {

/// One anisotropic 3D Gaussian. 14 attributes total: center (3), scale (3),
/// rotation quaternion (4, stored w,x,y,z), opacity (1), color (3).
/// Scales and opacity live in linear (activated) space; the PLY boundary
/// applies the usual exp/sigmoid mapping.
struct Gaussian {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d scale = Eigen::Vector3d::Ones();
    Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0}; // (w, x, y, z), unit norm
    double opacity = 1.0;                          // in [0, 1]
    Eigen::Vector3d color = Eigen::Vector3d::Zero(); // in [0, 1]^3

    static constexpr int kAttributeCount = 14;

    /// Throws ValidationError on any invariant breach. `index` is used in
    /// error messages when validating a set.
    void validate(long index = -1) const;
};

struct GaussianSet {
    std::vector<Gaussian> gaussians;
    std::string units = "cm";

    size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }

    void validate() const;
};

/// Rotation matrix of a unit quaternion (w, x, y, z). Throws unless
/// |q| = 1 within 1e-6. The result is orthonormal with determinant +1.
Eigen::Matrix3d quaternion_to_rotmat(const Eigen::Vector4d& q);

/// Quaternion (w,x,y,z) of a rotation matrix; used when composing rotations.
Eigen::Vector4d rotmat_to_quaternion(const Eigen::Matrix3d& r);

/// 3x3 covariance Sigma = R diag(s^2) R^T.
Eigen::Matrix3d covariance(const Gaussian& g);

/// Gaussian rigidly rotated about the origin: center -> R*center and the
/// orientation composed with R.
Gaussian rotate(const Gaussian& g, const Eigen::Matrix3d& r);

} // namespace splatkit
