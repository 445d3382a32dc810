#include "compass/synth_images.h"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <random>

namespace compass {
namespace {

uint8_t to_u8(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Canvas {
  int w, h;
  std::vector<double> v;     // luminance
  std::vector<uint8_t> red;  // pixels painted as the red panel

  Canvas(int width, int height) : w(width), h(height), v(static_cast<size_t>(width) * height), red(v.size(), 0) {}
  double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }

  template <typename Fn>
  void fill(int x0, int y0, int x1, int y1, Fn&& fn) {
    for (int y = std::max(0, y0); y < std::min(h, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(w, x1); ++x) at(x, y) = fn(x, y);
    }
  }
};

// Interval [a, b) is free of the occupied intervals, with `gap` clearance.
bool is_free(const std::vector<std::pair<int, int>>& occupied, int a, int b, int gap) {
  for (const auto& [u, v] : occupied) {
    if (a < v + gap && u < b + gap) return false;
  }
  return true;
}

}  // namespace

WindowScene generate_window_scene(const WindowSceneSpec& spec, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto uni_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  std::normal_distribution<double> gauss(0.0, 1.0);

  Canvas canvas(spec.width, spec.height);
  const double shade_period = uni(60.0, 160.0), shade_phase = uni(0.0, kTwoPi);
  canvas.fill(0, 0, spec.width, spec.height, [&](int x, int) {
    return spec.wall_mean + 6.0 * std::sin(x / shade_period + shade_phase) + spec.wall_noise * gauss(rng);
  });

  WindowScene scene;
  std::vector<std::pair<int, int>> occupied;  // column intervals
  const int band_top = static_cast<int>(uni(0.28, 0.42) * spec.height);
  const int n_windows = uni_int(spec.min_windows, spec.max_windows);
  for (int i = 0, attempts = 0; i < n_windows && attempts < 500; ++attempts) {
    const int w = uni_int(spec.min_window_width, spec.max_window_width);
    const int h = uni_int(spec.min_window_height, spec.max_window_height);
    const int x = uni_int(spec.min_gap, spec.width - spec.min_gap - w);
    if (!is_free(occupied, x, x + w, spec.min_gap)) continue;
    const int y = std::min(spec.height - h - 10, band_top + uni_int(0, 20));
    occupied.emplace_back(x, x + w);
    const double mean = uni(spec.window_min_mean, spec.window_max_mean);
    const double sky_slope = uni(-0.25, 0.0);
    canvas.fill(x, y, x + w, y + h, [&](int, int yy) {
      return mean + sky_slope * (yy - y - 0.5 * h) + spec.window_noise * gauss(rng);
    });
    scene.windows.push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(w),
                             static_cast<double>(h)});
    ++i;
  }

  for (int k = 0; k < spec.distractors; ++k) {
    const int kind = k % 5;
    if (kind == 0) {
      // Dark vertical pipe over the full height.
      for (int attempts = 0; attempts < 200; ++attempts) {
        const int x = uni_int(5, spec.width - 12);
        if (!is_free(occupied, x, x + 6, 25)) continue;
        occupied.emplace_back(x, x + 6);
        canvas.fill(x, 0, x + 6, spec.height, [&](int, int) { return 25.0 + 3.0 * gauss(rng); });
        break;
      }
    } else if (kind == 1) {
      // Ceiling beam above the window band.
      const int y = uni_int(10, std::max(11, band_top - 40));
      canvas.fill(0, y, spec.width, y + 10, [&](int, int) { return 30.0 + 3.0 * gauss(rng); });
    } else if (kind == 2) {
      // Dark door, darker than the wall.
      for (int attempts = 0; attempts < 200; ++attempts) {
        const int w = uni_int(50, 90);
        const int x = uni_int(10, spec.width - 10 - w);
        if (!is_free(occupied, x, x + w, 30)) continue;
        occupied.emplace_back(x, x + w);
        const int y = band_top + uni_int(0, 30);
        canvas.fill(x, y, x + w, spec.height, [&](int, int) { return 28.0 + 4.0 * gauss(rng); });
        break;
      }
    } else if (kind == 3) {
      // Diagonal cable.
      const double x0 = uni(0, spec.width), y0 = uni(0, spec.height);
      const double angle = uni(deg_to_rad(10.0), deg_to_rad(25.0));
      const double len = uni(80.0, 200.0);
      for (double t = 0; t < len; t += 0.5) {
        const int x = static_cast<int>(x0 + t * std::cos(angle)), y = static_cast<int>(y0 + t * std::sin(angle));
        for (int dy = 0; dy < 2; ++dy) {
          if (x >= 0 && x < spec.width && y + dy >= 0 && y + dy < spec.height) canvas.at(x, y + dy) = 20.0;
        }
      }
    } else {
      // Red safety panel with texture; grey-level bright enough to pass verification.
      for (int attempts = 0; attempts < 200; ++attempts) {
        const int w = uni_int(30, 50), h = uni_int(60, 90);
        const int x = uni_int(10, spec.width - 10 - w);
        if (!is_free(occupied, x, x + w, 30)) continue;
        occupied.emplace_back(x, x + w);
        const int y = band_top + uni_int(0, 30);
        for (int yy = y; yy < std::min(spec.height, y + h); ++yy) {
          for (int xx = x; xx < x + w; ++xx) canvas.red[static_cast<size_t>(yy) * spec.width + xx] = 1;
        }
        break;
      }
    }
  }

  scene.gray = GrayImage(spec.width, spec.height);
  scene.color = RgbImage(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const size_t i = static_cast<size_t>(y) * spec.width + x;
      if (canvas.red[i]) {
        const uint8_t r = to_u8(235.0 + 12.0 * gauss(rng)), g = to_u8(60.0 + 12.0 * gauss(rng)),
                      b = to_u8(50.0 + 12.0 * gauss(rng));
        scene.color.set(x, y, r, g, b);
      } else {
        const uint8_t v = to_u8(canvas.v[i]);
        scene.color.set(x, y, v, v, v);
      }
    }
  }
  scene.gray = to_gray(scene.color);
  return scene;
}

double DetectionScore::precision() const {
  const int d = true_positives + false_positives;
  return d == 0 ? 1.0 : static_cast<double>(true_positives) / d;
}

double DetectionScore::recall() const {
  const int d = true_positives + false_negatives;
  return d == 0 ? 1.0 : static_cast<double>(true_positives) / d;
}

DetectionScore score_detections(const std::vector<Box>& truth, const std::vector<WindowDetection>& detections,
                                double iou_threshold) {
  struct Pair {
    double iou;
    size_t t, d;
  };
  std::vector<Pair> pairs;
  for (size_t t = 0; t < truth.size(); ++t) {
    for (size_t d = 0; d < detections.size(); ++d) {
      const double iou = intersection_over_union(truth[t], detections[d].box);
      if (iou >= iou_threshold) pairs.push_back({iou, t, d});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<uint8_t> t_used(truth.size(), 0), d_used(detections.size(), 0);
  DetectionScore s;
  for (const auto& p : pairs) {
    if (t_used[p.t] || d_used[p.d]) continue;
    t_used[p.t] = d_used[p.d] = 1;
    ++s.true_positives;
  }
  s.false_negatives = static_cast<int>(truth.size()) - s.true_positives;
  s.false_positives = static_cast<int>(detections.size()) - s.true_positives;
  return s;
}

CameraModel default_test_camera() {
  CameraModel cam;
  cam.width = 1000;
  cam.height = 1000;
  cam.principal_point = {500.0, 500.0};
  cam.theta_max = deg_to_rad(95.0);
  cam.focal = 480.0 / cam.theta_max;
  return cam;
}

LineScene generate_line_scene(const LineSceneSpec& spec, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::normal_distribution<double> gauss(0.0, 1.0);
  const CameraModel& cam = spec.camera;
  const Eigen::Matrix3d r_cam_world =
      (Eigen::AngleAxisd(spec.pitch, Eigen::Vector3d::UnitX()) * Eigen::AngleAxisd(spec.roll, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  const double theta_limit = cam.theta_max - deg_to_rad(3.0);

  LineScene scene;
  auto try_add = [&](const Eigen::Vector3d& a_world, const Eigen::Vector3d& b_world, int kind) {
    const Eigen::Vector3d a = r_cam_world * a_world, b = r_cam_world * b_world;
    for (const auto* p : {&a, &b}) {
      if (std::atan2(std::hypot(p->x(), p->y()), p->z()) > theta_limit) return false;
    }
    Eigen::Vector2d pa = project(cam, a), pb = project(cam, b);
    if ((pa - pb).norm() < spec.min_pixel_length) return false;
    if (spec.pixel_noise > 0.0) {
      pa += spec.pixel_noise * Eigen::Vector2d(gauss(rng), gauss(rng));
      pb += spec.pixel_noise * Eigen::Vector2d(gauss(rng), gauss(rng));
    }
    scene.segments.push_back({pa.x(), pa.y(), pb.x(), pb.y()});
    scene.kind.push_back(kind);
    return true;
  };

  for (int i = 0, attempts = 0; i < spec.vertical_lines && attempts < 100000; ++attempts) {
    const double az = uni(0.0, kTwoPi), dist = uni(2.0, 8.0);
    const double x = dist * std::sin(az), z = dist * std::cos(az);
    if (try_add({x, uni(-3.0, -0.5), z}, {x, uni(0.3, 1.5), z}, 0)) ++i;
  }
  for (int i = 0, attempts = 0; i < spec.horizontal_lines && attempts < 100000; ++attempts) {
    const double y = uni(0.0, 1.0) < 0.5 ? uni(-3.0, -1.0) : uni(0.8, 1.5);
    const double len = uni(1.0, 4.0);
    bool added;
    if (i % 2 == 0) {
      const double z = uni(0.5, 8.0), x = uni(-6.0, 6.0);
      added = try_add({x, y, z}, {x + len, y, z}, 1);
    } else {
      const double x = (uni(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uni(1.0, 6.0), z = uni(-2.0, 6.0);
      added = try_add({x, y, z}, {x, y, z + len}, 2);
    }
    if (added) ++i;
  }
  const int inliers = static_cast<int>(scene.segments.size());
  const int outliers = static_cast<int>(std::lround(spec.outlier_fraction / (1.0 - spec.outlier_fraction) * inliers));
  const double radius = 0.9 * cam.fov_radius();
  for (int i = 0, attempts = 0; i < outliers && attempts < 100000; ++attempts) {
    auto sample = [&] {
      const double r = radius * std::sqrt(uni(0.0, 1.0)), a = uni(0.0, kTwoPi);
      return Eigen::Vector2d(cam.principal_point + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
    };
    const Eigen::Vector2d a = sample();
    const double len = uni(spec.min_pixel_length, 4.0 * spec.min_pixel_length), dir = uni(0.0, kTwoPi);
    const Eigen::Vector2d b = a + len * Eigen::Vector2d(std::cos(dir), std::sin(dir));
    if ((b - cam.principal_point).norm() > radius) continue;
    scene.segments.push_back({a.x(), a.y(), b.x(), b.y()});
    scene.kind.push_back(3);
    ++i;
  }
  return scene;
}

}  // namespace compass
