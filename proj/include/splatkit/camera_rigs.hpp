#pragma once

#include <string>
#include <vector>

#include "splatkit/camera.hpp"

namespace splatkit {

enum class CameraRig {
    Front3, // axis-aligned -z / -x / -y views
    Ring8,  // 8 azimuths at 45 degree spacing, elevation 0
};

CameraRig parse_camera_rig(const std::string& name);

/// Square orthographic cameras of the requested rig, framed on a cube of
/// the given half-extent around `center`. Throws on extent <= 0.
std::vector<OrthoCamera> make_camera_rig(CameraRig rig, int size, double extent,
                                         const Eigen::Vector3d& center = Eigen::Vector3d::Zero());

/// Single camera looking along `view_dir` at `center` from 2*extent away.
OrthoCamera make_look_camera(const Eigen::Vector3d& view_dir, const Eigen::Vector3d& center,
                             double extent, int size);

} // namespace splatkit
