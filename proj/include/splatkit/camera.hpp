#pragma once

#include <Eigen/Dense>

#include "splatkit/errors.hpp"

namespace splatkit {

/// Orthographic camera. World-to-camera map is x_cam = rotation * x + translation;
/// the camera looks down -z in its own frame, +y is up, +x is right.
/// Depth of a point is -z_cam, visible when inside [near, far].
///
/// Pixel convention: pixel (row i, col j) has continuous image coordinates
/// u = j, v = i at its center; u grows with +x_cam, v grows with -y_cam
/// (rows run top to bottom). half_width/half_height are the scene-unit
/// half-extents of the image plane.
struct OrthoCamera {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double half_width = 1.0;
    double half_height = 1.0;
    int width = 1;
    int height = 1;
    double near = 0.0;
    double far = 1.0;

    /// Throws unless rotation is orthonormal within 1e-6, far > near and
    /// width, height >= 1.
    void validate() const;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
        return rotation * p_world + translation;
    }

    double depth_of(const Eigen::Vector3d& p_world) const { return -to_camera(p_world).z(); }

    /// Continuous pixel coordinates (u, v) of a camera-frame point.
    Eigen::Vector2d cam_to_pixel(const Eigen::Vector3d& p_cam) const {
        double u = (p_cam.x() / (2.0 * half_width) + 0.5) * width - 0.5;
        double v = (0.5 - p_cam.y() / (2.0 * half_height)) * height - 0.5;
        return {u, v};
    }

    Eigen::Vector2d project_pixel(const Eigen::Vector3d& p_world) const {
        return cam_to_pixel(to_camera(p_world));
    }

    /// du/dx_cam and dv/dy_cam scale factors (pixels per scene unit).
    double pixels_per_unit_x() const { return width / (2.0 * half_width); }
    double pixels_per_unit_y() const { return height / (2.0 * half_height); }

    /// World-space unit view direction (the -z axis of the camera frame).
    Eigen::Vector3d view_direction() const { return rotation.transpose() * Eigen::Vector3d(0, 0, -1); }

    /// World-space origin of the ray through pixel center (i=row, j=col):
    /// the image-plane point at camera-frame z = 0.
    Eigen::Vector3d pixel_ray_origin(int row, int col) const {
        double x = ((col + 0.5) / width - 0.5) * 2.0 * half_width;
        double y = (0.5 - (row + 0.5) / height) * 2.0 * half_height;
        return rotation.transpose() * (Eigen::Vector3d(x, y, 0.0) - translation);
    }
};

} // namespace splatkit
