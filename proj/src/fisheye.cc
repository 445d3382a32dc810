#include "compass/fisheye.h"

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace compass {

void CameraModel::validate() const {
  if (!(focal > 0.0)) throw std::invalid_argument("camera focal length must be positive");
  if (!(theta_max > 0.0 && theta_max <= kPi)) throw std::invalid_argument("theta_max must lie in (0, pi]");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera image size must be positive");
}

double CameraModel::distort(double theta) const {
  const double t2 = theta * theta;
  const auto& k = distortion;
  return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
}

double CameraModel::undistort(double r_over_f) const {
  if (r_over_f <= 0.0) return 0.0;
  const auto& k = distortion;
  if (k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0 && k[3] == 0.0) return std::min(r_over_f, theta_max);
  if (r_over_f >= distort(theta_max)) return theta_max;

  double theta = std::min(r_over_f, theta_max);
  for (int it = 0; it < 10; ++it) {
    const double t2 = theta * theta;
    const double f = distort(theta) - r_over_f;
    const double df = 1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
    const double delta = f / df;
    theta -= delta;
    if (std::abs(delta) < 1e-10) break;
  }
  return std::clamp(theta, 0.0, theta_max);
}

Eigen::Vector3d unproject(const CameraModel& cam, const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d d = pixel - cam.principal_point;
  const double r = d.norm();
  const double theta = cam.undistort(r / cam.focal);
  const double phi = std::atan2(d.y(), d.x());
  const double s = std::sin(theta);
  return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

Eigen::Vector2d project(const CameraModel& cam, const Eigen::Vector3d& bearing) {
  const double rho = std::hypot(bearing.x(), bearing.y());
  const double theta = std::atan2(rho, bearing.z());
  if (theta > cam.theta_max + 1e-12) {
    throw OutOfFovError("bearing at incidence " + std::to_string(rad_to_deg(theta)) + " deg is outside the field of view");
  }
  if (rho == 0.0) return cam.principal_point;
  const double r = cam.focal * cam.distort(theta);
  return cam.principal_point + Eigen::Vector2d(r * bearing.x() / rho, r * bearing.y() / rho);
}

Azimuth azimuth_of(const Eigen::Vector3d& b) {
  Azimuth a;
  a.radians = normalize_angle(std::atan2(b.x(), b.z()));
  a.degenerate = std::abs(b.x()) < 1e-6 && std::abs(b.z()) < 1e-6;
  return a;
}

Eigen::Vector3d rotate_about_vertical(const Eigen::Vector3d& b, double angle) {
  // Exact for the common front/back offsets.
  if (angle == kPi) return {-b.x(), b.y(), -b.z()};
  if (angle == 0.0) return b;
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * b.x() + s * b.z(), b.y(), -s * b.x() + c * b.z()};
}

const RigCamera& CameraRig::camera(int id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return c;
  }
  throw std::invalid_argument("rig has no camera with id " + std::to_string(id));
}

Azimuth CameraRig::to_body_azimuth(const RigCamera& cam, const Eigen::Vector3d& camera_bearing) const {
  Azimuth a = azimuth_of(rotate_about_vertical(camera_bearing, cam.yaw_offset));
  a.radians = normalize_angle(body_yaw + azimuth_sign * a.radians);
  return a;
}

CameraRig make_dual_rig(const CameraModel& model) {
  CameraRig rig;
  rig.cameras.push_back({0, "front", model, 0.0});
  rig.cameras.push_back({1, "back", model, kPi});
  return rig;
}

CameraRig read_rig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rig config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    CameraRig rig;
    rig.body_yaw = deg_to_rad(j.value("body_yaw_deg", 0.0));
    rig.azimuth_sign = j.value("azimuth_sign", 1) < 0 ? -1 : 1;
    for (const auto& c : j.at("cameras")) {
      RigCamera cam;
      cam.id = c.at("id").get<int>();
      cam.name = c.value("name", std::string());
      cam.model.focal = c.at("f").get<double>();
      cam.model.principal_point = {c.at("c_x").get<double>(), c.at("c_y").get<double>()};
      cam.model.distortion = {c.value("k1", 0.0), c.value("k2", 0.0), c.value("k3", 0.0), c.value("k4", 0.0)};
      cam.model.theta_max = deg_to_rad(c.value("theta_max_deg", 95.0));
      cam.model.width = c.at("width").get<int>();
      cam.model.height = c.at("height").get<int>();
      const double yaw_deg = c.value("yaw_offset_deg", 0.0);
      cam.yaw_offset = yaw_deg == 180.0 ? kPi : normalize_angle(deg_to_rad(yaw_deg));
      cam.model.validate();
      rig.cameras.push_back(std::move(cam));
    }
    if (rig.cameras.empty()) throw IoError("rig config '" + path + "' lists no cameras");
    return rig;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed rig config '" + path + "': " + e.what());
  }
}

void write_rig(const std::string& path, const CameraRig& rig) {
  nlohmann::json j;
  j["body_yaw_deg"] = rad_to_deg(rig.body_yaw);
  j["azimuth_sign"] = rig.azimuth_sign;
  auto& cams = j["cameras"] = nlohmann::json::array();
  for (const auto& c : rig.cameras) {
    cams.push_back({{"id", c.id},
                    {"name", c.name},
                    {"f", c.model.focal},
                    {"c_x", c.model.principal_point.x()},
                    {"c_y", c.model.principal_point.y()},
                    {"k1", c.model.distortion[0]},
                    {"k2", c.model.distortion[1]},
                    {"k3", c.model.distortion[2]},
                    {"k4", c.model.distortion[3]},
                    {"theta_max_deg", rad_to_deg(c.model.theta_max)},
                    {"yaw_offset_deg", rad_to_deg(c.yaw_offset)},
                    {"width", c.model.width},
                    {"height", c.model.height}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write rig config '" + path + "'");
  out << j.dump(2) << "\n";
}

AzimuthSpan detection_to_span(const CameraRig& rig, const WindowDetection& det) {
  const RigCamera& cam = rig.camera(det.camera_id);
  const Box& b = det.box;
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw std::invalid_argument("window detection box has zero width or height");
  if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > cam.model.width || b.y + b.h > cam.model.height) {
    throw std::invalid_argument("window detection box lies outside the image");
  }
  const double mid_y = b.y + 0.5 * b.h;
  const Azimuth left = rig.to_body_azimuth(cam, unproject(cam.model, {b.x, mid_y}));
  const Azimuth right = rig.to_body_azimuth(cam, unproject(cam.model, {b.x + b.w, mid_y}));
  const double d = wrap_to_pi(right.radians - left.radians);
  if (d == 0.0) throw std::invalid_argument("window detection subtends zero azimuth");
  return d > 0.0 ? AzimuthSpan{left.radians, d} : AzimuthSpan{right.radians, -d};
}

std::vector<double> spans_to_hit_type(std::span<const AzimuthSpan> spans, int n_bins) {
  if (n_bins < 8) throw std::invalid_argument("n_bins must be >= 8");
  std::vector<double> row(n_bins, hit_type_value(HitType::kWall));
  const double bins_per_rad = n_bins / kTwoPi;
  for (const auto& span : spans) {
    if (!(span.length > 0.0)) continue;
    if (span.length >= kTwoPi) {
      std::fill(row.begin(), row.end(), hit_type_value(HitType::kWindow));
      continue;
    }
    const double s = normalize_angle(span.start) * bins_per_rad;
    const double e = s + span.length * bins_per_rad;
    const int64_t first = static_cast<int64_t>(std::floor(s + 0.5));
    const int64_t last = std::max<int64_t>(first, static_cast<int64_t>(std::ceil(e + 0.5)) - 1);
    const int64_t count = std::min<int64_t>(last - first + 1, n_bins);
    for (int64_t i = 0; i < count; ++i) {
      row[static_cast<size_t>((first + i) % n_bins)] = hit_type_value(HitType::kWindow);
    }
  }
  return row;
}

RadialDescriptor build_visual_descriptor(std::span<const WindowDetection> detections, const CameraRig& rig,
                                         int n_bins) {
  std::vector<AzimuthSpan> spans;
  spans.reserve(detections.size());
  for (const auto& det : detections) spans.push_back(detection_to_span(rig, det));
  const std::vector<double> row = spans_to_hit_type(spans, n_bins);
  RadialDescriptor d(n_bins);
  for (int j = 0; j < n_bins; ++j) d.channels(kHitTypeChannel, j) = row[j];
  d.active = kHitTypeOnly;
  d.transition_count = transition_signature(d);
  return d;
}

}  // namespace compass
