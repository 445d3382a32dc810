#include "compass/window_detection.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace compass {
namespace {

// Float image used internally for smoothing and gradients.
struct Field {
  int width = 0, height = 0;
  std::vector<float> v;

  Field(int w, int h) : width(w), height(h), v(static_cast<size_t>(w) * h, 0.0f) {}
  float at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
  float clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }
};

Field gaussian5(const GrayImage& image) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  Field src(image.width, image.height);
  for (size_t i = 0; i < src.v.size(); ++i) src.v[i] = image.pixels[i];
  Field tmp(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      float s = 0.f;
      for (int d = -2; d <= 2; ++d) s += k[d + 2] * src.clamped(x + d, y);
      tmp.at(x, y) = s;
    }
  }
  Field out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      float s = 0.f;
      for (int d = -2; d <= 2; ++d) s += k[d + 2] * tmp.clamped(x, y + d);
      out.at(x, y) = s;
    }
  }
  return out;
}

struct Gradients {
  Field magnitude;
  std::vector<uint8_t> vertical_edge;  // 1 when |gx| >= |gy|: the edge runs vertically

  Gradients(int w, int h) : magnitude(w, h), vertical_edge(static_cast<size_t>(w) * h, 0) {}
};

Gradients sobel(const Field& f) {
  Gradients g(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const float gx = (f.clamped(x + 1, y - 1) + 2.f * f.clamped(x + 1, y) + f.clamped(x + 1, y + 1)) -
                       (f.clamped(x - 1, y - 1) + 2.f * f.clamped(x - 1, y) + f.clamped(x - 1, y + 1));
      const float gy = (f.clamped(x - 1, y + 1) + 2.f * f.clamped(x, y + 1) + f.clamped(x + 1, y + 1)) -
                       (f.clamped(x - 1, y - 1) + 2.f * f.clamped(x, y - 1) + f.clamped(x + 1, y - 1));
      g.magnitude.at(x, y) = std::abs(gx) + std::abs(gy);
      g.vertical_edge[static_cast<size_t>(y) * f.width + x] = std::abs(gx) >= std::abs(gy) ? 1 : 0;
    }
  }
  return g;
}

struct Pixel {
  int x, y;
};

class EdgeTracer {
 public:
  EdgeTracer(const Gradients& g, float threshold)
      : g_(g), w_(g.magnitude.width), h_(g.magnitude.height), threshold_(threshold),
        marked_(static_cast<size_t>(w_) * h_, 0) {}

  bool marked(int x, int y) const { return marked_[idx(x, y)] != 0; }

  std::vector<Pixel> trace(int x0, int y0) {
    marked_[idx(x0, y0)] = 1;
    const bool vertical = is_vertical(x0, y0);
    std::vector<Pixel> first = walk(x0, y0, vertical, -1);
    std::vector<Pixel> second = walk(x0, y0, vertical, +1);
    std::vector<Pixel> chain(first.rbegin(), first.rend());
    chain.push_back({x0, y0});
    chain.insert(chain.end(), second.begin(), second.end());
    return chain;
  }

 private:
  size_t idx(int x, int y) const { return static_cast<size_t>(y) * w_ + x; }
  bool is_vertical(int x, int y) const { return g_.vertical_edge[idx(x, y)] != 0; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < h_; }
  float mag(int x, int y) const { return inside(x, y) ? g_.magnitude.at(x, y) : -1.f; }

  // Follows the ridge of maximum gradient from (x, y). In vertical mode the
  // walk advances one row per step in direction `dir`; in horizontal mode one
  // column. The mode follows the local edge orientation.
  std::vector<Pixel> walk(int x, int y, bool vertical, int dir) {
    std::vector<Pixel> out;
    for (;;) {
      // Straight ahead first so ties keep the walk straight.
      std::array<Pixel, 3> cand;
      if (vertical) {
        cand = {Pixel{x, y + dir}, Pixel{x - 1, y + dir}, Pixel{x + 1, y + dir}};
      } else {
        cand = {Pixel{x + dir, y}, Pixel{x + dir, y - 1}, Pixel{x + dir, y + 1}};
      }
      int best = -1;
      float best_mag = -1.f;
      for (int i = 0; i < 3; ++i) {
        const float m = mag(cand[i].x, cand[i].y);
        if (m > best_mag) {
          best_mag = m;
          best = i;
        }
      }
      if (best < 0 || best_mag < threshold_) break;
      const Pixel next = cand[best];
      if (marked(next.x, next.y)) break;
      marked_[idx(next.x, next.y)] = 1;
      out.push_back(next);
      const int px = x, py = y;
      x = next.x;
      y = next.y;

      const bool now_vertical = is_vertical(x, y);
      if (now_vertical != vertical) {
        // Turn toward the stronger side, away from where we came from.
        if (now_vertical) {
          const float up = mag(x, y - 1), down = mag(x, y + 1);
          dir = (y != py) ? (y > py ? 1 : -1) : (down > up ? 1 : -1);
        } else {
          const float left = mag(x - 1, y), right = mag(x + 1, y);
          dir = (x != px) ? (x > px ? 1 : -1) : (right > left ? 1 : -1);
        }
        vertical = now_vertical;
      }
    }
    return out;
  }

  const Gradients& g_;
  int w_, h_;
  float threshold_;
  std::vector<uint8_t> marked_;
};

// Running sums for an orthogonal-regression line fit.
struct LineFit {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double cx() const { return sx / n; }
  double cy() const { return sy / n; }
  // Unit direction of the principal axis.
  std::pair<double, double> direction() const {
    const double vxx = sxx / n - cx() * cx();
    const double vyy = syy / n - cy() * cy();
    const double vxy = sxy / n - cx() * cy();
    const double angle = 0.5 * std::atan2(2.0 * vxy, vxx - vyy);
    return {std::cos(angle), std::sin(angle)};
  }
  double distance(double x, double y) const {
    const auto [dx, dy] = direction();
    return std::abs(-(x - cx()) * dy + (y - cy()) * dx);
  }
  std::pair<double, double> project(double x, double y) const {
    const auto [dx, dy] = direction();
    const double t = (x - cx()) * dx + (y - cy()) * dy;
    return {cx() + t * dx, cy() + t * dy};
  }
};

void fit_chain(const std::vector<Pixel>& chain, const SegmentDetectorConfig& cfg, std::vector<LineSegment>& out) {
  const size_t n = chain.size();
  const size_t min_px = std::max<size_t>(3, static_cast<size_t>(std::floor(cfg.min_length)));
  size_t i = 0;
  while (i + min_px <= n) {
    LineFit fit;
    for (size_t k = i; k < i + min_px; ++k) fit.add(chain[k].x, chain[k].y);
    double worst = 0.0;
    for (size_t k = i; k < i + min_px; ++k) worst = std::max(worst, fit.distance(chain[k].x, chain[k].y));
    if (worst > cfg.max_deviation) {
      ++i;
      continue;
    }
    size_t j = i + min_px;
    while (j < n && fit.distance(chain[j].x, chain[j].y) <= cfg.max_deviation) {
      fit.add(chain[j].x, chain[j].y);
      ++j;
    }
    const auto [ax, ay] = fit.project(chain[i].x, chain[i].y);
    const auto [bx, by] = fit.project(chain[j - 1].x, chain[j - 1].y);
    LineSegment seg{ax, ay, bx, by};
    if (seg.length() >= cfg.min_length) out.push_back(seg);
    i = j;
  }
}

double percentile_value(const GrayImage& image, double q) {
  std::array<size_t, 256> hist{};
  for (uint8_t p : image.pixels) ++hist[p];
  const double target = q * image.pixels.size();
  size_t cum = 0;
  for (int v = 0; v < 256; ++v) {
    cum += hist[v];
    if (cum >= target) return v;
  }
  return 255;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  const int n = static_cast<int>(x.size());
  const int half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
  }
  return out;
}

void normalize_peak(std::vector<double>& x) {
  const double peak = x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
}

double vertical_overlap(double a_min, double a_max, double b_min, double b_max) {
  return std::min(a_max, b_max) - std::max(a_min, b_min);
}

}  // namespace

std::vector<LineSegment> detect_segments(const GrayImage& image, const SegmentDetectorConfig& cfg) {
  std::vector<LineSegment> segments;
  if (image.empty()) return segments;
  const Gradients g = sobel(gaussian5(image));
  const int w = image.width, h = image.height;
  const float threshold = static_cast<float>(cfg.gradient_threshold);
  const float anchor_min = static_cast<float>(cfg.gradient_threshold + cfg.anchor_threshold);
  const int stride = std::max(1, cfg.scan_interval);

  struct Anchor {
    float magnitude;
    int x, y;
  };
  std::vector<Anchor> anchors;
  for (int y = 1; y < h - 1; y += stride) {
    for (int x = 1; x < w - 1; x += stride) {
      const float m = g.magnitude.at(x, y);
      if (m < anchor_min) continue;
      // Non-maximum test across the edge; strict on one side so a two-pixel
      // plateau yields one anchor.
      if (g.vertical_edge[static_cast<size_t>(y) * w + x]) {
        if (m > g.magnitude.at(x - 1, y) && m >= g.magnitude.at(x + 1, y)) anchors.push_back({m, x, y});
      } else {
        if (m > g.magnitude.at(x, y - 1) && m >= g.magnitude.at(x, y + 1)) anchors.push_back({m, x, y});
      }
    }
  }
  std::stable_sort(anchors.begin(), anchors.end(),
                   [](const Anchor& a, const Anchor& b) { return a.magnitude > b.magnitude; });

  EdgeTracer tracer(g, threshold);
  for (const Anchor& a : anchors) {
    if (tracer.marked(a.x, a.y)) continue;
    const std::vector<Pixel> chain = tracer.trace(a.x, a.y);
    if (chain.size() < 3) continue;
    fit_chain(chain, cfg, segments);
  }
  return segments;
}

WindowBand estimate_window_band(const GrayImage& image, std::span<const LineSegment> segments, const BandConfig& cfg) {
  const int h = image.height;
  WindowBand fallback;
  fallback.y_top = static_cast<int>(std::lround(cfg.fallback_margin * h));
  fallback.y_bot = std::min(h - 1, static_cast<int>(std::lround((1.0 - cfg.fallback_margin) * h)));
  if (image.empty()) return fallback;

  const double pct = percentile_value(image, cfg.brightness_percentile);
  const double mean =
      std::accumulate(image.pixels.begin(), image.pixels.end(), 0.0) / static_cast<double>(image.pixels.size());
  std::vector<double> bright(h, 0.0);
  for (int y = 0; y < h; ++y) {
    int count = 0;
    for (int x = 0; x < image.width; ++x) {
      const double v = image.at(x, y);
      if (v >= pct && v > mean) ++count;
    }
    bright[y] = count;
  }
  bright = moving_average(bright, cfg.smoothing_rows);
  normalize_peak(bright);

  std::vector<double> vertical(h, 0.0);
  for (const auto& s : segments) {
    if (s.angle_from_horizontal() <= cfg.vertical_angle) continue;
    const int row = static_cast<int>(std::lround(s.mid_y()));
    if (row >= 0 && row < h) vertical[row] += 1.0;
  }
  vertical = moving_average(vertical, cfg.smoothing_rows);
  normalize_peak(vertical);

  std::vector<double> combined(h);
  for (int y = 0; y < h; ++y) combined[y] = 0.5 * bright[y] + 0.5 * vertical[y];
  const double peak = *std::max_element(combined.begin(), combined.end());
  if (!(peak > 0.0)) return fallback;

  const double cut = cfg.threshold_ratio * peak;
  int best_start = -1, best_len = 0;
  for (int y = 0; y < h;) {
    if (combined[y] > cut) {
      int start = y;
      while (y < h && combined[y] > cut) ++y;
      if (y - start > best_len) {
        best_len = y - start;
        best_start = start;
      }
    } else {
      ++y;
    }
  }
  if (best_len <= cfg.min_run) return fallback;
  return {best_start, best_start + best_len - 1};
}

std::vector<EdgeCluster> cluster_vertical_edges(std::span<const LineSegment> segments, const WindowBand& band,
                                                const ClusterConfig& cfg) {
  if (band.y_top < 0 || band.y_bot <= band.y_top) throw std::invalid_argument("invalid window band");
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    const auto& s = segments[i];
    if (s.mid_y() < band.y_top || s.mid_y() > band.y_bot) continue;
    if (!(s.angle_from_horizontal() > cfg.min_angle)) continue;
    if (s.length() < cfg.min_length) continue;
    kept.push_back(i);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [&](int a, int b) { return segments[a].mid_x() < segments[b].mid_x(); });

  std::vector<EdgeCluster> clusters;
  std::vector<double> x_sums;
  for (int i : kept) {
    const auto& s = segments[i];
    int best = -1;
    double best_dx = 0.0;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
      const double dx = std::abs(s.mid_x() - clusters[c].x);
      if (dx > cfg.gap) continue;
      if (vertical_overlap(s.y_min(), s.y_max(), clusters[c].y_min, clusters[c].y_max) < 1.0) continue;
      if (best < 0 || dx < best_dx) {
        best = c;
        best_dx = dx;
      }
    }
    if (best < 0) {
      clusters.push_back({{i}, s.mid_x(), s.y_min(), s.y_max()});
      x_sums.push_back(s.mid_x());
    } else {
      EdgeCluster& c = clusters[best];
      c.members.push_back(i);
      x_sums[best] += s.mid_x();
      c.x = x_sums[best] / static_cast<double>(c.members.size());
      c.y_min = std::min(c.y_min, s.y_min());
      c.y_max = std::max(c.y_max, s.y_max());
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const EdgeCluster& a, const EdgeCluster& b) { return a.x < b.x; });
  return clusters;
}

RegionScores measure_box(const GrayImage& image, const Box& box, const VerifyThresholds& thr) {
  RegionScores out;
  const int x0 = static_cast<int>(std::ceil(box.x)) + thr.edge_margin;
  const int x1 = static_cast<int>(std::floor(box.x + box.w)) - thr.edge_margin;  // inclusive
  const int y0 = std::max(0, static_cast<int>(std::ceil(box.y)) + thr.edge_margin);
  const int y1 = std::min(image.height - 1, static_cast<int>(std::floor(box.y + box.h)) - thr.edge_margin);
  if (x1 < x0 || y1 < y0) return out;

  double sum = 0.0, sq = 0.0;
  size_t n = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = std::max(0, x0); x <= std::min(image.width - 1, x1); ++x) {
      const double v = image.at(x, y);
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  if (n == 0) return out;
  out.interior_mean = sum / n;
  out.interior_std = std::sqrt(std::max(0.0, sq / n - out.interior_mean * out.interior_mean));

  // Flanking strips just outside the box edges.
  const int left_hi = static_cast<int>(std::floor(box.x)) - thr.edge_margin;
  const int right_lo = static_cast<int>(std::ceil(box.x + box.w)) + thr.edge_margin;
  double wall_sum = 0.0;
  size_t wall_n = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = left_hi - thr.wall_strip + 1; x <= left_hi; ++x) {
      if (x >= 0 && x < image.width) {
        wall_sum += image.at(x, y);
        ++wall_n;
      }
    }
    for (int x = right_lo; x < right_lo + thr.wall_strip; ++x) {
      if (x >= 0 && x < image.width) {
        wall_sum += image.at(x, y);
        ++wall_n;
      }
    }
  }
  if (wall_n == 0) return out;
  out.wall_mean = wall_sum / wall_n;
  out.valid = true;
  return out;
}

bool passes_verification(const RegionScores& s, const VerifyThresholds& thr) {
  if (!s.valid) return false;
  if (s.interior_mean < s.wall_mean + thr.contrast_margin) return false;
  return s.interior_std >= thr.texture_floor || s.interior_mean >= thr.bright_sky;
}

std::vector<WindowDetection> pair_and_verify(std::span<const EdgeCluster> clusters, const GrayImage& image,
                                             const PairingRules& rules, const VerifyThresholds& thr) {
  std::vector<WindowDetection> out;
  const int n = static_cast<int>(clusters.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const EdgeCluster& l = clusters[i];
      const EdgeCluster& r = clusters[j];
      const double sep = r.x - l.x;
      if (sep < rules.min_separation || sep > rules.max_separation) continue;
      const double top = std::max(l.y_min, r.y_min);
      const double bot = std::min(l.y_max, r.y_max);
      const double overlap = bot - top;
      const double longer = std::max(l.y_max - l.y_min, r.y_max - r.y_min);
      if (!(overlap > 0.0) || longer <= 0.0 || overlap / longer < rules.min_overlap_ratio) continue;

      if (rules.reject_straddling) {
        bool straddles = false;
        for (int k = 0; k < n && !straddles; ++k) {
          const EdgeCluster& m = clusters[k];
          if (k == i || k == j || m.x <= l.x || m.x >= r.x) continue;
          const double ov = vertical_overlap(m.y_min, m.y_max, top, bot);
          straddles = ov > 0.0 && ov / overlap >= rules.min_overlap_ratio;
        }
        if (straddles) continue;
      }

      Box box{l.x, top, sep, overlap};
      box.x = std::max(0.0, box.x);
      box.y = std::max(0.0, box.y);
      box.w = std::min(box.w, image.width - box.x);
      box.h = std::min(box.h, image.height - box.y);
      const RegionScores s = measure_box(image, box, thr);
      if (!passes_verification(s, thr)) continue;
      WindowDetection det;
      det.box = box;
      det.brightness_score = s.interior_mean;
      det.contrast_score = s.interior_mean - s.wall_mean;
      det.texture_score = s.interior_std;
      out.push_back(det);
    }
  }
  return out;
}

std::vector<WindowDetection> suppress_and_filter(std::vector<WindowDetection> dets, const SuppressionConfig& cfg,
                                                 const CameraModel* camera, const RgbImage* color) {
  std::stable_sort(dets.begin(), dets.end(), [](const WindowDetection& a, const WindowDetection& b) {
    if (a.brightness_score != b.brightness_score) return a.brightness_score > b.brightness_score;
    if (a.box.x != b.box.x) return a.box.x < b.box.x;
    return a.box.y < b.box.y;
  });
  std::vector<WindowDetection> kept;
  for (const auto& d : dets) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (intersection_over_union(d.box, k.box) > cfg.iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }

  std::vector<WindowDetection> out;
  for (const auto& d : kept) {
    if (camera) {
      const double r = std::hypot(d.box.center_x() - camera->principal_point.x(),
                                  d.box.center_y() - camera->principal_point.y());
      if (r > cfg.periphery_factor * camera->fov_radius()) continue;
    }
    if (color && !color->empty()) {
      double sr = 0, sg = 0, sb = 0;
      size_t n = 0;
      const int x0 = std::max(0, static_cast<int>(d.box.x)), x1 = std::min(color->width, static_cast<int>(d.box.x + d.box.w));
      const int y0 = std::max(0, static_cast<int>(d.box.y)), y1 = std::min(color->height, static_cast<int>(d.box.y + d.box.h));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const uint8_t* p = color->at(x, y);
          sr += p[0];
          sg += p[1];
          sb += p[2];
          ++n;
        }
      }
      if (n > 0 && sr > cfg.red_ratio * sg && sr > cfg.red_ratio * sb) continue;
    }
    out.push_back(d);
  }
  return out;
}

WindowDetectionResult detect_windows(const GrayImage& image, const WindowDetectorConfig& cfg,
                                     const CameraModel* camera, const RgbImage* color,
                                     const std::vector<LineSegment>* segments, int camera_id) {
  WindowDetectionResult result;
  result.segments = segments ? *segments : detect_segments(image, cfg.segments);
  result.band = estimate_window_band(image, result.segments, cfg.band);
  result.clusters = cluster_vertical_edges(result.segments, result.band, cfg.clusters);
  result.detections = suppress_and_filter(pair_and_verify(result.clusters, image, cfg.pairing, cfg.verify),
                                          cfg.suppression, camera, color);
  for (auto& d : result.detections) d.camera_id = camera_id;

  // Segments whose cluster forms a side of a surviving box.
  std::vector<uint8_t> used(result.segments.size(), 0);
  for (const auto& d : result.detections) {
    for (const auto& c : result.clusters) {
      const bool is_side = std::abs(c.x - d.box.x) < 0.5 || std::abs(c.x - (d.box.x + d.box.w)) < 0.5;
      if (!is_side) continue;
      for (int m : c.members) used[m] = 1;
    }
  }
  for (size_t i = 0; i < used.size(); ++i) {
    if (used[i]) result.window_segments.push_back(static_cast<int>(i));
  }
  return result;
}

}  // namespace compass
