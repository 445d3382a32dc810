#ifndef COMPASS_ATTITUDE_H_
#define COMPASS_ATTITUDE_H_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "compass/common.h"
#include "compass/features.h"
#include "compass/fisheye.h"

namespace compass {

// Plane through the camera center containing a segment's bearings.
struct GreatCircle {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();
  int segment_index = -1;
};

// Normal = normalized cross product of the endpoint bearings. Throws
// DegenerateGeometryError when the bearings are (anti)parallel.
GreatCircle segment_to_great_circle(const CameraModel& cam, const LineSegment& seg);

struct VanishingPoint {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  std::vector<int> inliers;  // indices into the circle list

  int inlier_count() const { return static_cast<int>(inliers.size()); }
};

// Picks the representative of {d, -d} with y > 0, or z >= 0 when y == 0
// (then x >= 0 when z == 0 too).
Eigen::Vector3d canonicalize_direction(const Eigen::Vector3d& d);

struct RansacConfig {
  double angular_tolerance = deg_to_rad(2.0);
  int iterations = 200;
  uint64_t seed = 0;
  // Hypotheses farther than this from `axis` are skipped; no restriction
  // when unset.
  std::optional<double> cone_half_angle;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
};

/**
 * RANSAC over pairs of great circles. Each hypothesis is the cross product of
 * two sampled normals; a circle is an inlier when |normal . vp| is below
 * sin(angular_tolerance). The best hypothesis is refined as the smallest
 * eigenvector of the inlier normals' scatter matrix and its inliers are
 * recounted. Throws std::invalid_argument for fewer than two circles and
 * EmptyResultError when no hypothesis gathers two inliers.
 */
VanishingPoint ransac_vanishing_point(std::span<const GreatCircle> circles, const RansacConfig& cfg);

struct AttitudeEstimate {
  double roll = 0.0;   // radians
  double pitch = 0.0;  // radians
  Eigen::Vector3d gravity = Eigen::Vector3d::UnitY();  // body frame, unit
  int inlier_count = 0;
  bool single_source = false;
};

class UnsupportedAttitudeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Gravity g is the vertical VP rotated by the camera's yaw offset into the
 * body frame (x right, y down, z forward), sign-fixed so g_y > 0:
 *   pitch = atan2(g_z, g_y),  roll = atan2(-g_x, sqrt(g_y^2 + g_z^2)).
 * Throws UnsupportedAttitudeError when g_y is not positive.
 */
AttitudeEstimate roll_pitch_from_gravity(const VanishingPoint& vertical_vp, const RigCamera& camera);

// Gravity direction, in camera coordinates, of a camera with the given roll
// and pitch; inverse of the formulas above.
Eigen::Vector3d gravity_from_roll_pitch(double roll, double pitch);

struct AttitudeConfig {
  RansacConfig ransac;
  double vertical_cone = deg_to_rad(30.0);
  int horizontal_vps = 2;
};

struct CameraAttitude {
  int camera_id = 0;
  std::vector<GreatCircle> circles;
  std::optional<VanishingPoint> vertical;
  std::vector<VanishingPoint> horizontal;
  std::optional<AttitudeEstimate> estimate;
};

/**
 * Vertical VP (most inliers within vertical_cone of image-down) followed by
 * up to `horizontal_vps` further VPs found sequentially on the remaining
 * circles. Degenerate segments are skipped. Never throws for lack of
 * structure; `vertical` and `estimate` are then empty.
 */
CameraAttitude estimate_camera_attitude(std::span<const LineSegment> segments, const RigCamera& camera,
                                        const AttitudeConfig& cfg);

struct DualAttitude {
  AttitudeEstimate fused;
  CameraAttitude front;
  CameraAttitude back;
};

/**
 * Runs both cameras concurrently with seeds split from cfg.ransac.seed and
 * fuses their body-frame gravity as the inlier-weighted normalized vector
 * sum. If one camera fails the other is returned with single_source set.
 * Throws EmptyResultError when neither camera yields a vertical VP.
 * The rig must contain cameras 0 (front) and 1 (back).
 */
DualAttitude estimate_attitude_dual(std::span<const LineSegment> front_segments,
                                    std::span<const LineSegment> back_segments, const CameraRig& rig,
                                    const AttitudeConfig& cfg);

}  // namespace compass

#endif  // COMPASS_ATTITUDE_H_
