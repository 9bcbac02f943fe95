#include "splatkit/camera.hpp"

namespace splatkit {

void OrthoCamera::validate() const {
    if (!rotation.allFinite() || !translation.allFinite())
        throw ValidationError("camera has non-finite pose");
    const Eigen::Matrix3d should_be_identity = rotation * rotation.transpose();
    if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
        throw ValidationError("camera rotation is not orthonormal");
    if (!(half_width > 0.0) || !(half_height > 0.0))
        throw ValidationError("camera half extents must be positive");
    if (width < 1 || height < 1) throw ValidationError("camera resolution must be at least 1x1");
    if (!(far > near)) throw ValidationError("camera far plane must exceed near plane");
}

} // namespace splatkit
