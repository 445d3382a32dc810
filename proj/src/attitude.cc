#include "compass/attitude.h"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <cmath>
#include <future>
#include <random>

namespace compass {
namespace {

std::vector<int> count_inliers(std::span<const GreatCircle> circles, const Eigen::Vector3d& vp, double sin_tol) {
  std::vector<int> inliers;
  for (int i = 0; i < static_cast<int>(circles.size()); ++i) {
    if (std::abs(circles[i].normal.dot(vp)) < sin_tol) inliers.push_back(i);
  }
  return inliers;
}

// Direction most orthogonal to the given normals.
Eigen::Vector3d refine(std::span<const GreatCircle> circles, const std::vector<int>& inliers) {
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int i : inliers) scatter += circles[i].normal * circles[i].normal.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(scatter);
  return solver.eigenvectors().col(0).normalized();
}

AttitudeEstimate attitude_from_body_gravity(const Eigen::Vector3d& g, int inliers) {
  AttitudeEstimate est;
  est.gravity = g.normalized();
  est.pitch = std::atan2(est.gravity.z(), est.gravity.y());
  est.roll = std::atan2(-est.gravity.x(), std::hypot(est.gravity.y(), est.gravity.z()));
  est.inlier_count = inliers;
  return est;
}

}  // namespace

GreatCircle segment_to_great_circle(const CameraModel& cam, const LineSegment& seg) {
  const Eigen::Vector3d a = unproject(cam, {seg.x1, seg.y1});
  const Eigen::Vector3d b = unproject(cam, {seg.x2, seg.y2});
  const Eigen::Vector3d n = a.cross(b);
  const double norm = n.norm();
  if (norm < 1e-12) throw DegenerateGeometryError("segment endpoints unproject to parallel bearings");
  GreatCircle c;
  c.normal = n / norm;
  return c;
}

Eigen::Vector3d canonicalize_direction(const Eigen::Vector3d& d) {
  if (d.y() > 0.0) return d;
  if (d.y() < 0.0) return -d;
  if (d.z() > 0.0) return d;
  if (d.z() < 0.0) return -d;
  return d.x() >= 0.0 ? d : Eigen::Vector3d(-d);
}

VanishingPoint ransac_vanishing_point(std::span<const GreatCircle> circles, const RansacConfig& cfg) {
  const int n = static_cast<int>(circles.size());
  if (n < 2) throw std::invalid_argument("vanishing point estimation needs at least two great circles");
  const double sin_tol = std::sin(cfg.angular_tolerance);
  const double cos_cone = cfg.cone_half_angle ? std::cos(*cfg.cone_half_angle) : -1.0;
  const Eigen::Vector3d axis = cfg.axis.normalized();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> first(0, n - 1);
  std::uniform_int_distribution<int> second(0, n - 2);

  Eigen::Vector3d best_vp = Eigen::Vector3d::Zero();
  std::vector<int> best_inliers;
  for (int it = 0; it < cfg.iterations; ++it) {
    const int i = first(rng);
    int j = second(rng);
    if (j >= i) ++j;
    const Eigen::Vector3d h = circles[i].normal.cross(circles[j].normal);
    const double norm = h.norm();
    if (norm < 1e-12) continue;
    const Eigen::Vector3d vp = h / norm;
    if (cfg.cone_half_angle && std::abs(vp.dot(axis)) < cos_cone) continue;
    std::vector<int> inliers = count_inliers(circles, vp, sin_tol);
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      best_vp = vp;
    }
  }
  if (best_inliers.size() < 2) throw EmptyResultError("no vanishing point hypothesis with two inliers");

  // Two refinement rounds; the second uses the inliers of the first.
  Eigen::Vector3d vp = best_vp;
  std::vector<int> inliers = best_inliers;
  for (int round = 0; round < 2; ++round) {
    const Eigen::Vector3d refined = refine(circles, inliers);
    std::vector<int> refined_inliers = count_inliers(circles, refined, sin_tol);
    if (refined_inliers.size() < 2) break;
    vp = refined;
    inliers = std::move(refined_inliers);
  }

  VanishingPoint out;
  out.direction = canonicalize_direction(vp);
  out.inliers = std::move(inliers);
  return out;
}

Eigen::Vector3d gravity_from_roll_pitch(double roll, double pitch) {
  return {-std::sin(roll), std::cos(roll) * std::cos(pitch), std::cos(roll) * std::sin(pitch)};
}

AttitudeEstimate roll_pitch_from_gravity(const VanishingPoint& vertical_vp, const RigCamera& camera) {
  Eigen::Vector3d g = rotate_about_vertical(canonicalize_direction(vertical_vp.direction), camera.yaw_offset);
  if (!(g.y() > 0.0)) throw UnsupportedAttitudeError("vertical vanishing point implies a tilt beyond 90 degrees");
  return attitude_from_body_gravity(g, vertical_vp.inlier_count());
}

CameraAttitude estimate_camera_attitude(std::span<const LineSegment> segments, const RigCamera& camera,
                                        const AttitudeConfig& cfg) {
  CameraAttitude out;
  out.camera_id = camera.id;
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    try {
      GreatCircle c = segment_to_great_circle(camera.model, segments[i]);
      c.segment_index = i;
      out.circles.push_back(c);
    } catch (const DegenerateGeometryError&) {
    }
  }
  if (out.circles.size() < 2) return out;

  RansacConfig vertical_cfg = cfg.ransac;
  vertical_cfg.cone_half_angle = cfg.vertical_cone;
  vertical_cfg.axis = Eigen::Vector3d::UnitY();
  try {
    out.vertical = ransac_vanishing_point(out.circles, vertical_cfg);
  } catch (const EmptyResultError&) {
    return out;
  }
  try {
    out.estimate = roll_pitch_from_gravity(*out.vertical, camera);
  } catch (const UnsupportedAttitudeError&) {
  }

  // Remaining circles, as indices into out.circles.
  std::vector<uint8_t> used(out.circles.size(), 0);
  for (int i : out.vertical->inliers) used[i] = 1;
  for (int k = 0; k < cfg.horizontal_vps; ++k) {
    std::vector<int> remaining;
    std::vector<GreatCircle> subset;
    for (size_t i = 0; i < out.circles.size(); ++i) {
      if (!used[i]) {
        remaining.push_back(static_cast<int>(i));
        subset.push_back(out.circles[i]);
      }
    }
    if (subset.size() < 2) break;
    RansacConfig h_cfg = cfg.ransac;
    h_cfg.cone_half_angle.reset();
    h_cfg.seed = split_seed(cfg.ransac.seed, static_cast<uint64_t>(k) + 1);
    try {
      VanishingPoint vp = ransac_vanishing_point(subset, h_cfg);
      for (int& i : vp.inliers) {
        i = remaining[i];
        used[i] = 1;
      }
      out.horizontal.push_back(std::move(vp));
    } catch (const EmptyResultError&) {
      break;
    }
  }
  return out;
}

DualAttitude estimate_attitude_dual(std::span<const LineSegment> front_segments,
                                    std::span<const LineSegment> back_segments, const CameraRig& rig,
                                    const AttitudeConfig& cfg) {
  const RigCamera& front_cam = rig.camera(0);
  const RigCamera& back_cam = rig.camera(1);
  AttitudeConfig front_cfg = cfg, back_cfg = cfg;
  front_cfg.ransac.seed = split_seed(cfg.ransac.seed, 0);
  back_cfg.ransac.seed = split_seed(cfg.ransac.seed, 1);

  auto back_future = std::async(std::launch::async, [&] {
    return estimate_camera_attitude(back_segments, back_cam, back_cfg);
  });
  DualAttitude out;
  out.front = estimate_camera_attitude(front_segments, front_cam, front_cfg);
  out.back = back_future.get();

  const auto& f = out.front.estimate;
  const auto& b = out.back.estimate;
  if (!f && !b) throw EmptyResultError("neither camera produced a vertical vanishing point");
  if (f && !b) {
    out.fused = *f;
    out.fused.single_source = true;
  } else if (b && !f) {
    out.fused = *b;
    out.fused.single_source = true;
  } else {
    Eigen::Vector3d gb = b->gravity;
    if (gb.dot(f->gravity) < 0.0) gb = -gb;
    const Eigen::Vector3d sum = f->inlier_count * f->gravity + b->inlier_count * gb;
    out.fused = attitude_from_body_gravity(sum, f->inlier_count + b->inlier_count);
  }
  return out;
}

}  // namespace compass
