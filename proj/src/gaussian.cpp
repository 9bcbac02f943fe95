#include "splatkit/gaussian.hpp"

#include <cmath>

namespace splatkit {

namespace {

std::string elem(long index) {
    return index < 0 ? std::string() : " (element " + std::to_string(index) + ")";
}

} // namespace

void Gaussian::validate(long index) const {
    for (int k = 0; k < 3; ++k) {
        if (!std::isfinite(center[k]) || !std::isfinite(scale[k]) || !std::isfinite(color[k]))
            throw ValidationError("gaussian has non-finite field" + elem(index));
    }
    for (int k = 0; k < 4; ++k)
        if (!std::isfinite(rotation[k]))
            throw ValidationError("gaussian has non-finite rotation" + elem(index));
    if (!std::isfinite(opacity))
        throw ValidationError("gaussian has non-finite opacity" + elem(index));
    if (scale.minCoeff() <= 0.0)
        throw ValidationError("gaussian scale must be strictly positive" + elem(index));
    if (std::abs(rotation.norm() - 1.0) > 1e-6)
        throw ValidationError("gaussian quaternion is not unit norm" + elem(index));
    if (opacity < 0.0 || opacity > 1.0)
        throw ValidationError("gaussian opacity outside [0,1]" + elem(index));
    if (color.minCoeff() < 0.0 || color.maxCoeff() > 1.0)
        throw ValidationError("gaussian color outside [0,1]" + elem(index));
}

void GaussianSet::validate() const {
    for (size_t i = 0; i < gaussians.size(); ++i)
        gaussians[i].validate(static_cast<long>(i));
}

Eigen::Matrix3d quaternion_to_rotmat(const Eigen::Vector4d& q) {
    if (std::abs(q.norm() - 1.0) > 1e-6)
        throw ValidationError("quaternion is not unit norm");
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Eigen::Vector4d rotmat_to_quaternion(const Eigen::Matrix3d& m) {
    Eigen::Quaterniond q(m);
    q.normalize();
    Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
    if (out[0] < 0.0) out = -out;
    return out;
}

Eigen::Matrix3d covariance(const Gaussian& g) {
    Eigen::Matrix3d r = quaternion_to_rotmat(g.rotation);
    Eigen::Matrix3d sigma = r * g.scale.array().square().matrix().asDiagonal() * r.transpose();
    // symmetrize away round-off
    return 0.5 * (sigma + sigma.transpose());
}

Gaussian rotate(const Gaussian& g, const Eigen::Matrix3d& r) {
    Gaussian out = g;
    out.center = r * g.center;
    out.rotation = rotmat_to_quaternion(r * quaternion_to_rotmat(g.rotation));
    return out;
}

} // namespace splatkit
