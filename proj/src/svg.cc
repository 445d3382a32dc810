#include "compass/svg.h"

#include <Eigen/Geometry>
#include <cmath>
#include <sstream>

namespace compass {
namespace {

std::string num(double v) { return format_double(v, 2); }

class Svg {
 public:
  Svg(double w, double h, const std::string& comment) {
    std::string safe = comment;
    for (size_t p = safe.find("--"); p != std::string::npos; p = safe.find("--", p)) safe.replace(p, 2, "- ");
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
         << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
         << "<!--\n" << safe << "-->\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
         << "\" fill=\"" << fill << "\"" << extra << "/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke = "none") {
    out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\"" << fill
         << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width = 1.0,
                const std::string& fill = "none") {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
         << "\" points=\"";
    for (const auto& [x, y] : pts) out_ << num(x) << ',' << num(y) << ' ';
    out_ << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"monospace\" font-size=\"" << size
         << "\">" << s << "</text>\n";
  }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

std::string gray(double v) {
  const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(v, 0.0, 1.0))));
  return "rgb(" + std::to_string(g) + "," + std::to_string(g) + "," + std::to_string(g) + ")";
}

const char* label_color(HitType h) {
  switch (h) {
    case HitType::kWall: return "#404040";
    case HitType::kWindow: return "#d62728";
    case HitType::kOpen: return "#f0f0f0";
  }
  return "#000000";
}

}  // namespace

std::string descriptor_svg(const RadialDescriptor& d, const RaycastConfig& cfg, const std::string& comment) {
  static const char* names[kNumChannels] = {"range", "hit type", "gradient", "inverse range", "local std"};
  const int n = d.n_bins();
  const double cell = 2.0, strip_h = 24.0, left = 110.0, polar_r = 180.0;
  const double width = std::max(left + n * cell + 20.0, 2.0 * polar_r + 40.0);
  const double strips_h = 20.0 + kNumChannels * (strip_h + 8.0);
  Svg svg(width, strips_h + 2.0 * polar_r + 60.0, comment);
  for (int c = 0; c < kNumChannels; ++c) {
    const double y = 20.0 + c * (strip_h + 8.0);
    svg.text(4.0, y + 16.0, names[c]);
    if (!d.active.test(c)) {
      svg.rect(left, y, n * cell, strip_h, "none", " stroke=\"#999999\" stroke-dasharray=\"4 2\"");
      continue;
    }
    for (int j = 0; j < n; ++j) svg.rect(left + j * cell, y, cell, strip_h, gray(d.channels(c, j)));
  }

  const double cx = width / 2.0, cy = strips_h + 30.0 + polar_r;
  svg.circle(cx, cy, polar_r, "none", "#cccccc");
  if (d.active.test(kRangeChannel) && n > 0) {
    std::vector<std::pair<double, double>> pts;
    for (int j = 0; j <= n; ++j) {
      const int k = j % n;
      const double a = kTwoPi * k / n;
      const double r = polar_r * d.channels(kRangeChannel, k);
      pts.emplace_back(cx + r * std::cos(a), cy - r * std::sin(a));
    }
    svg.polyline(pts, "#1f77b4", 1.0);
    for (int j = 0; j < n; ++j) {
      if (hit_type_from_value(d.channels(kHitTypeChannel, j)) != HitType::kWindow) continue;
      const double a = kTwoPi * j / n, r = polar_r * d.channels(kRangeChannel, j);
      svg.circle(cx + r * std::cos(a), cy - r * std::sin(a), 1.5, "#d62728");
    }
  }
  svg.text(cx - polar_r, cy + polar_r + 20.0, "r_max = " + num(cfg.r_max) + " m, bins = " + std::to_string(n));
  return svg.finish();
}

std::string detection_overlay_svg(int width, int height, const std::vector<LineSegment>& segments,
                                  const std::vector<int>& window_segments,
                                  const std::vector<WindowDetection>& detections, const std::string& comment) {
  Svg svg(width, height, comment);
  svg.rect(0, 0, width, height, "#ffffff");
  std::vector<uint8_t> red(segments.size(), 0);
  for (int i : window_segments) {
    if (i >= 0 && i < static_cast<int>(segments.size())) red[i] = 1;
  }
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    svg.line(s.x1, s.y1, s.x2, s.y2, red[i] ? "#ff0000" : "#00a000", red[i] ? 2.0 : 1.0);
  }
  for (const auto& d : detections) {
    svg.rect(d.box.x, d.box.y, d.box.w, d.box.h, "none", " stroke=\"#0000ff\" stroke-width=\"1.5\"");
  }
  return svg.finish();
}

std::string agreement_svg(const AgreementReport& report, const std::string& comment) {
  const double cell = 2.0, strip = 20.0, left = 80.0;
  const int n = report.total;
  Svg svg(left + n * cell + 20.0, 3.0 * (strip + 8.0) + 50.0, comment);
  const char* rows[3] = {"camera", "map", "agree"};
  for (int r = 0; r < 3; ++r) svg.text(4.0, 20.0 + r * (strip + 8.0) + 14.0, rows[r]);
  for (const auto& b : report.bins) {
    const double x = left + b.bin * cell;
    svg.rect(x, 20.0, cell, strip, label_color(b.camera));
    svg.rect(x, 20.0 + strip + 8.0, cell, strip, label_color(b.map));
    svg.rect(x, 20.0 + 2.0 * (strip + 8.0), cell, strip, b.agree ? "#2ca02c" : "#d62728");
  }
  svg.text(left, 3.0 * (strip + 8.0) + 36.0, format_agreement(report));
  return svg.finish();
}

std::string correlation_svg(const std::vector<double>& curve, double yaw_anchor, const std::string& comment) {
  const CorrelationSummary s = summarize_correlation(curve, yaw_anchor);
  const double w = 760.0, h = 300.0, left = 50.0, top = 20.0, pw = 680.0, ph = 240.0;
  Svg svg(w, h, comment);
  svg.rect(left, top, pw, ph, "none", " stroke=\"#999999\"");
  double lo = curve[0], hi = curve[0];
  for (double v : curve) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  auto px = [&](int k) { return left + pw * k / std::max<size_t>(1, curve.size() - 1); };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };
  std::vector<std::pair<double, double>> pts;
  for (size_t k = 0; k < curve.size(); ++k) pts.emplace_back(px(static_cast<int>(k)), py(curve[k]));
  svg.polyline(pts, "#1f77b4", 1.2);
  svg.circle(px(s.peak_shift), py(s.peak_score), 4.0, "#d62728");
  svg.text(left, h - 8.0,
           "peak shift " + std::to_string(s.peak_shift) + " (" + num(s.peak_yaw_deg) + " deg), score " +
               format_double(s.peak_score, 4));
  return svg.finish();
}

std::string sphere_svg(const CameraAttitude& attitude, const std::string& comment) {
  const double size = 520.0, c = size / 2.0, r = 240.0;
  Svg svg(size, size, comment);
  svg.circle(c, c, r, "#fafafa", "#999999");

  std::vector<const char*> color(attitude.circles.size(), "#bbbbbb");
  if (attitude.vertical) {
    for (int i : attitude.vertical->inliers) color[i] = "#1f77b4";
  }
  static const char* horizontal_colors[] = {"#2ca02c", "#ff7f0e", "#9467bd"};
  for (size_t k = 0; k < attitude.horizontal.size(); ++k) {
    for (int i : attitude.horizontal[k].inliers) color[i] = horizontal_colors[k % 3];
  }

  for (size_t i = 0; i < attitude.circles.size(); ++i) {
    const Eigen::Vector3d n = attitude.circles[i].normal;
    const Eigen::Vector3d u = n.unitOrthogonal();
    const Eigen::Vector3d v = n.cross(u);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= 180; ++k) {
      const double t = kTwoPi * k / 180.0;
      const Eigen::Vector3d p = std::cos(t) * u + std::sin(t) * v;
      if (p.z() < 0.0) {
        svg.polyline(pts, color[i], 0.8);
        pts.clear();
        continue;
      }
      pts.emplace_back(c + r * p.x(), c + r * p.y());
    }
    svg.polyline(pts, color[i], 0.8);
  }

  auto mark = [&](const VanishingPoint& vp, const char* fill) {
    Eigen::Vector3d d = vp.direction;
    if (d.z() < 0.0) d = -d;
    svg.circle(c + r * d.x(), c + r * d.y(), 6.0, fill, "#000000");
  };
  if (attitude.vertical) mark(*attitude.vertical, "#1f77b4");
  for (size_t k = 0; k < attitude.horizontal.size(); ++k) mark(attitude.horizontal[k], horizontal_colors[k % 3]);
  if (attitude.estimate) {
    svg.text(10.0, size - 10.0,
             "roll " + num(rad_to_deg(attitude.estimate->roll)) + " deg, pitch " +
                 num(rad_to_deg(attitude.estimate->pitch)) + " deg, inliers " +
                 std::to_string(attitude.estimate->inlier_count));
  }
  return svg.finish();
}

}  // namespace compass
