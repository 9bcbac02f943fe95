#include "splatkit/camera_rigs.hpp"

#include <cmath>

namespace splatkit {

CameraRig parse_camera_rig(const std::string& name) {
    if (name == "front3") return CameraRig::Front3;
    if (name == "ring8") return CameraRig::Ring8;
    throw ConfigError("unknown camera rig '" + name + "' (expected front3 or ring8)");
}

OrthoCamera make_look_camera(const Eigen::Vector3d& view_dir, const Eigen::Vector3d& center,
                             double extent, int size) {
    if (!(extent > 0.0)) throw ValidationError("camera rig extent must be positive");
    if (size < 1) throw ValidationError("camera rig size must be >= 1");
    const Eigen::Vector3d forward = view_dir.normalized();
    Eigen::Vector3d up(0.0, 1.0, 0.0);
    if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(0.0, 0.0, 1.0);
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d cam_up = right.cross(forward);

    OrthoCamera cam;
    // rows of the world->camera rotation: x right, y up, z backward
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = cam_up.transpose();
    cam.rotation.row(2) = (-forward).transpose();
    const Eigen::Vector3d eye = center - 2.0 * extent * forward;
    cam.translation = -cam.rotation * eye;
    cam.half_width = extent;
    cam.half_height = extent;
    cam.width = size;
    cam.height = size;
    cam.near = 0.5 * extent;
    cam.far = 4.0 * extent;
    cam.validate();
    return cam;
}

std::vector<OrthoCamera> make_camera_rig(CameraRig rig, int size, double extent,
                                         const Eigen::Vector3d& center) {
    std::vector<OrthoCamera> cams;
    switch (rig) {
        case CameraRig::Front3:
            cams.push_back(make_look_camera({0.0, 0.0, -1.0}, center, extent, size)); // front
            cams.push_back(make_look_camera({-1.0, 0.0, 0.0}, center, extent, size)); // left
            cams.push_back(make_look_camera({0.0, -1.0, 0.0}, center, extent, size)); // top
            break;
        case CameraRig::Ring8:
            for (int k = 0; k < 8; ++k) {
                const double azimuth = k * EIGEN_PI / 4.0;
                const Eigen::Vector3d dir(-std::sin(azimuth), 0.0, -std::cos(azimuth));
                cams.push_back(make_look_camera(dir, center, extent, size));
            }
            break;
    }
    return cams;
}

} // namespace splatkit
