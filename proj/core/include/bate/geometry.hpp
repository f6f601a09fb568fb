#pragma once

#include <Eigen/Dense>

namespace bate {

/// Pin-hole camera. The intrinsic matrix is the canonical
/// [f/alpha 0 w/2; 0 f/alpha h/2; 0 0 1] built by make_camera.
struct CameraModel {
  double focal_length = 0.0;   // f, meters
  double pixel_size = 0.0;     // alpha, meters per pixel
  double image_width = 0.0;    // pixels
  double image_height = 0.0;   // pixels
  Eigen::Matrix3d intrinsic_matrix = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d cam_to_world = Eigen::Matrix3d::Identity();
};

/// Axis-aligned detection box in pixel coordinates.
/// size is the extent along one image axis (width by default).
struct BoundingBox {
  double center_x = 0.0;
  double center_y = 0.0;
  double size = 0.0;
};

enum class SizeAxis { width, height };

/// One visual observation: unit bearing in the world frame plus the
/// subtended angle. angle must lie in (0, pi/2).
struct Measurement {
  Eigen::Vector3d bearing = Eigen::Vector3d::UnitZ();
  double angle = 0.0;
};

/// Validates intrinsic parameters and the rotation (orthonormal within 1e-10,
/// det +1) and assembles the canonical intrinsic matrix.
CameraModel make_camera(double focal_length, double pixel_size, double image_width,
                        double image_height, const Eigen::Matrix3d& cam_to_world);

/// World-frame unit bearing through the box center:
/// normalize(R_cw * K^-1 * [cx, cy, 1]).
Eigen::Vector3d pixel_to_bearing(const BoundingBox& box, const CameraModel& cam);

/// Subtended angle of the box via the law of cosines over the rays through
/// the midpoints of the two box sides orthogonal to `axis`. Invariant to
/// camera rotation for a fixed physical target.
double bbox_to_angle(const BoundingBox& box, const CameraModel& cam,
                     SizeAxis axis = SizeAxis::width);

/// theta = 2*atan(size / (2*range)).
double subtended_angle_exact(double size, double range);

/// Proportional model theta = size / range; the form the pseudo-linear
/// measurement construction and the observability analyses are exact under.
double subtended_angle_proportional(double size, double range);

/// Orthogonal projection onto the plane normal to a unit bearing: I - g g^T.
/// Symmetric, idempotent, annihilates g.
Eigen::Matrix3d projection_matrix(const Eigen::Vector3d& bearing);

/// Rodrigues rotation about a unit axis.
Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double angle);

/// Rotates a unit bearing about `axis` by `angle`: R(axis, angle) * bearing.
Eigen::Vector3d perturb_bearing(const Eigen::Vector3d& bearing,
                                const Eigen::Vector3d& axis, double angle);

/// Projects a camera-frame point to pixels. Points with non-positive depth
/// are rejected as out-of-frustum.
Eigen::Vector2d project_to_pixel(const Eigen::Vector3d& point_cam, const CameraModel& cam);

}  // namespace bate
