#ifndef COMPASS_FISHEYE_H_
#define COMPASS_FISHEYE_H_

#include <Eigen/Core>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "compass/common.h"
#include "compass/descriptor.h"
#include "compass/features.h"

namespace compass {

class OutOfFovError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Kannala-Brandt fisheye camera.
 *
 * Image radius r = focal * poly(theta) with
 *   poly(theta) = theta + k1 theta^3 + k2 theta^5 + k3 theta^7 + k4 theta^9,
 * which reduces to the equidistant model r = focal * theta for zero
 * coefficients. Camera frame: x right, y down, z along the optical axis.
 * poly is assumed monotone on [0, theta_max].
 */
struct CameraModel {
  double focal = 1.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
  double theta_max = deg_to_rad(95.0);
  std::array<double, 4> distortion{0.0, 0.0, 0.0, 0.0};
  int width = 1;
  int height = 1;

  void validate() const;

  double distort(double theta) const;
  // Inverse of distort by Newton iteration, clamped to theta_max.
  double undistort(double r_over_f) const;
  // Image radius of the theta_max circle.
  double fov_radius() const { return focal * distort(theta_max); }
};

// Unit bearing for a pixel; pixels beyond the FoV circle clamp to theta_max.
Eigen::Vector3d unproject(const CameraModel& cam, const Eigen::Vector2d& pixel);

// Pixel for a bearing. Throws OutOfFovError when the incidence angle exceeds
// theta_max.
Eigen::Vector2d project(const CameraModel& cam, const Eigen::Vector3d& bearing);

struct Azimuth {
  double radians = 0.0;     // atan2(b_x, b_z) in [0, 2*pi)
  bool degenerate = false;  // bearing within 1e-6 of the vertical axis
};

Azimuth azimuth_of(const Eigen::Vector3d& b);

// Rotation about the camera/body vertical (y) axis; pi maps (x, y, z) to
// (-x, y, -z) and adds pi to the azimuth.
Eigen::Vector3d rotate_about_vertical(const Eigen::Vector3d& b, double angle);

struct RigCamera {
  int id = 0;
  std::string name;
  CameraModel model;
  double yaw_offset = 0.0;  // optical axis azimuth in the body frame
};

/**
 * Cameras mounted on one body. A camera-frame bearing is rotated about the
 * vertical axis by the camera's yaw_offset; its azimuth alpha then maps to
 * the descriptor azimuth body_yaw + azimuth_sign * alpha. azimuth_sign
 * is -1 when camera azimuth (growing toward image right, i.e. clockwise seen
 * from above) must match counterclockwise descriptor bins; the relation is a
 * calibration input.
 */
struct CameraRig {
  std::vector<RigCamera> cameras;
  double body_yaw = 0.0;
  int azimuth_sign = 1;

  const RigCamera& camera(int id) const;
  Azimuth to_body_azimuth(const RigCamera& cam, const Eigen::Vector3d& camera_bearing) const;
};

// Front camera (id 0, yaw 0) and back camera (id 1, yaw pi), shared intrinsics.
CameraRig make_dual_rig(const CameraModel& model);

CameraRig read_rig(const std::string& path);
void write_rig(const std::string& path, const CameraRig& rig);

// Arc of azimuths from `start` counterclockwise over `length` radians.
struct AzimuthSpan {
  double start = 0.0;   // [0, 2*pi)
  double length = 0.0;  // (0, 2*pi]
};

/**
 * Azimuth interval covered by a window box. The midpoints of the left and
 * right box edges are unprojected, rotated into the body frame, and the
 * shorter arc between their azimuths is returned. Throws
 * std::invalid_argument for an empty box or one outside the image.
 */
AzimuthSpan detection_to_span(const CameraRig& rig, const WindowDetection& det);

/**
 * Rasterizes spans into a hit-type row: 0.5 where any span overlaps a bin,
 * 1.0 elsewhere. Bin j covers [2*pi*j/n - pi/n, 2*pi*j/n + pi/n); a span
 * edge exactly on a bin boundary belongs to the bin above it.
 */
std::vector<double> spans_to_hit_type(std::span<const AzimuthSpan> spans, int n_bins);

// Hit-type-only descriptor from window detections of any rig camera.
RadialDescriptor build_visual_descriptor(std::span<const WindowDetection> detections, const CameraRig& rig,
                                         int n_bins);

}  // namespace compass

#endif  // COMPASS_FISHEYE_H_
