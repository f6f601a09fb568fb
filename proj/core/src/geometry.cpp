#include "bate/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "bate/errors.hpp"

namespace bate {

namespace {

void check_unit(const Eigen::Vector3d& v, const char* name) {
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw ConfigError(std::string(name) + " must be a unit vector");
  }
}

void check_box(const BoundingBox& box, const CameraModel& cam) {
  if (!(box.size > 0.0)) throw ConfigError("bounding box size must be positive");
  if (box.center_x < 0.0 || box.center_x > cam.image_width ||
      box.center_y < 0.0 || box.center_y > cam.image_height) {
    throw ConfigError("bounding box center outside image bounds");
  }
}

}  // namespace

CameraModel make_camera(double focal_length, double pixel_size, double image_width,
                        double image_height, const Eigen::Matrix3d& cam_to_world) {
  if (!(focal_length > 0.0) || !(pixel_size > 0.0)) {
    throw ConfigError("camera focal length and pixel size must be positive");
  }
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw ConfigError("camera image dimensions must be positive");
  }
  const Eigen::Matrix3d gram = cam_to_world.transpose() * cam_to_world;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10 ||
      cam_to_world.determinant() < 0.0) {
    throw ConfigError("cam_to_world must be a proper rotation");
  }
  CameraModel cam;
  cam.focal_length = focal_length;
  cam.pixel_size = pixel_size;
  cam.image_width = image_width;
  cam.image_height = image_height;
  const double fp = focal_length / pixel_size;
  cam.intrinsic_matrix << fp, 0.0, image_width / 2.0,
                          0.0, fp, image_height / 2.0,
                          0.0, 0.0, 1.0;
  cam.cam_to_world = cam_to_world;
  return cam;
}

Eigen::Vector3d pixel_to_bearing(const BoundingBox& box, const CameraModel& cam) {
  check_box(box, cam);
  const double det = cam.intrinsic_matrix.determinant();
  if (std::abs(det) < 1e-12) throw NumericError("camera intrinsic matrix is singular");
  const Eigen::Vector3d q(box.center_x, box.center_y, 1.0);
  const Eigen::Vector3d ray = cam.cam_to_world * cam.intrinsic_matrix.inverse() * q;
  const double n = ray.norm();
  if (n < 1e-12) throw NumericError("degenerate pixel ray");
  return ray / n;
}

double bbox_to_angle(const BoundingBox& box, const CameraModel& cam, SizeAxis axis) {
  check_box(box, cam);
  const double fp = cam.focal_length / cam.pixel_size;
  // Offsets of the box center from the principal point; the law-of-cosines
  // form below is symmetric in the two side rays, so signs are immaterial.
  double dx = std::abs(box.center_x - cam.image_width / 2.0);
  double dy = std::abs(box.center_y - cam.image_height / 2.0);
  if (axis == SizeAxis::height) std::swap(dx, dy);
  const double s = box.size;
  const double l_left = std::sqrt(fp * fp + (dx - s / 2.0) * (dx - s / 2.0) + dy * dy);
  const double l_right = std::sqrt(fp * fp + (dx + s / 2.0) * (dx + s / 2.0) + dy * dy);
  const double c = (l_left * l_left + l_right * l_right - s * s) / (2.0 * l_left * l_right);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double subtended_angle_exact(double size, double range) {
  if (!(size > 0.0)) throw ConfigError("target size must be positive");
  if (!(range > 0.0)) throw ConfigError("range must be positive");
  return 2.0 * std::atan(size / (2.0 * range));
}

double subtended_angle_proportional(double size, double range) {
  if (!(size > 0.0)) throw ConfigError("target size must be positive");
  if (!(range > 0.0)) throw ConfigError("range must be positive");
  return size / range;
}

Eigen::Matrix3d projection_matrix(const Eigen::Vector3d& bearing) {
  check_unit(bearing, "bearing");
  return Eigen::Matrix3d::Identity() - bearing * bearing.transpose();
}

Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double angle) {
  check_unit(axis, "rotation axis");
  // R = I + sin(a) [k]_x + (1 - cos(a)) [k]_x^2
  Eigen::Matrix3d k;
  k << 0.0, -axis.z(), axis.y(),
       axis.z(), 0.0, -axis.x(),
       -axis.y(), axis.x(), 0.0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Eigen::Vector3d perturb_bearing(const Eigen::Vector3d& bearing,
                                const Eigen::Vector3d& axis, double angle) {
  check_unit(bearing, "bearing");
  return axis_angle_rotation(axis, angle) * bearing;
}

Eigen::Vector2d project_to_pixel(const Eigen::Vector3d& point_cam, const CameraModel& cam) {
  if (!(point_cam.z() > 0.0)) throw NumericError("point behind camera (out of frustum)");
  const Eigen::Vector3d h = cam.intrinsic_matrix * point_cam;
  return Eigen::Vector2d(h.x() / h.z(), h.y() / h.z());
}

}  // namespace bate
