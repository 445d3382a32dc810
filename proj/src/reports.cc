#include "compass/reports.h"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "compass/common.h"
#include "compass/matching.h"

namespace compass {

std::string make_header(const std::string& command, const ConfigEntries& config) {
  std::string out = "# compass " COMPASS_VERSION " " + command + "\n";
  for (const auto& [k, v] : config) out += "# " + k + ": " + v + "\n";
  return out;
}

std::string format_double(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

CorrelationSummary summarize_correlation(const std::vector<double>& curve, double yaw_anchor) {
  if (curve.empty()) throw std::invalid_argument("empty correlation curve");
  CorrelationSummary s;
  s.peak_shift = argmax_shift(curve);
  s.peak_score = curve[s.peak_shift];
  s.peak_yaw_deg = rad_to_deg(normalize_angle(yaw_anchor + kTwoPi * s.peak_shift / curve.size()));
  return s;
}

void write_correlation_csv(std::ostream& out, const std::vector<double>& curve, double yaw_anchor,
                           const std::string& header) {
  const CorrelationSummary s = summarize_correlation(curve, yaw_anchor);
  out << header;
  out << "# peak_shift: " << s.peak_shift << "\n# peak_yaw_deg: " << format_double(s.peak_yaw_deg, 3)
      << "\n# peak_score: " << format_double(s.peak_score, 9) << "\n";
  out << "shift,yaw_deg,score\n";
  const int n = static_cast<int>(curve.size());
  for (int k = 0; k < n; ++k) {
    out << k << ',' << format_double(rad_to_deg(normalize_angle(yaw_anchor + kTwoPi * k / n)), 3) << ','
        << format_double(curve[k], 9) << '\n';
  }
}

const char* label_name(HitType h) {
  switch (h) {
    case HitType::kWall: return "wall";
    case HitType::kWindow: return "window";
    case HitType::kOpen: return "open";
  }
  return "?";
}

AgreementReport agreement_report(const RadialDescriptor& d_vis, const RadialDescriptor& d_map, int shift) {
  if (d_vis.n_bins() != d_map.n_bins()) throw std::invalid_argument("descriptor bin counts differ");
  const int n = d_vis.n_bins();
  AgreementReport r;
  r.total = n;
  if (n == 0) return r;
  const auto cam = hit_labels(d_vis);
  const auto map = hit_labels(d_map);
  const int s = positive_mod(shift, n);
  for (int j = 0; j < n; ++j) {
    BinAgreement b{j, cam[j], map[(j + s) % n], cam[j] == map[(j + s) % n]};
    r.agree_count += b.agree;
    r.bins.push_back(b);
  }
  r.fraction = static_cast<double>(r.agree_count) / n;

  if (r.agree_count == n) return r;
  const double deg_per_bin = 360.0 / n;
  if (r.agree_count == 0) {
    r.disagreement_arcs.push_back({0.0, 360.0});
    return r;
  }
  // Start scanning just after an agreeing bin so that wrapping runs stay whole.
  int start = 0;
  while (!r.bins[start].agree) ++start;
  for (int k = 1; k <= n; ++k) {
    const int j = (start + k) % n;
    if (r.bins[j].agree) continue;
    int len = 0;
    while (!r.bins[(j + len) % n].agree) ++len;
    r.disagreement_arcs.push_back({j * deg_per_bin, std::fmod((j + len) * deg_per_bin, 360.0)});
    k += len - 1;
  }
  return r;
}

std::string format_agreement(const AgreementReport& r) {
  return std::to_string(r.agree_count) + " out of " + std::to_string(r.total) + " bins (" +
         std::to_string(static_cast<int>(std::lround(100.0 * r.fraction))) + "%)";
}

void write_agreement_csv(std::ostream& out, const AgreementReport& r, const std::string& header) {
  out << header;
  out << "# agreement: " << format_agreement(r) << "\n";
  out << "# disagreement_arcs_deg:";
  for (const auto& a : r.disagreement_arcs) out << ' ' << format_double(a.start_deg, 1) << '-' << format_double(a.end_deg, 1);
  out << "\n";
  out << "bin,azimuth_deg,camera,map,agree\n";
  const double deg_per_bin = r.total ? 360.0 / r.total : 0.0;
  for (const auto& b : r.bins) {
    out << b.bin << ',' << format_double(b.bin * deg_per_bin, 3) << ',' << label_name(b.camera) << ','
        << label_name(b.map) << ',' << (b.agree ? 1 : 0) << '\n';
  }
}

DescriptorStats descriptor_stats(const RadialDescriptor& d, const RaycastConfig& cfg) {
  DescriptorStats s;
  s.n_bins = d.n_bins();
  const auto labels = hit_labels(d);
  for (HitType h : labels) {
    if (h == HitType::kWindow) ++s.window_bins;
    else if (h == HitType::kWall) ++s.wall_bins;
    else ++s.open_bins;
  }
  s.transitions = transition_signature(labels);
  const int n = s.n_bins;
  for (int j = 0; j < n; ++j) {
    if (labels[j] == HitType::kWindow && labels[(j + n - 1) % n] != HitType::kWindow) ++s.window_segments;
  }
  if (n > 0 && s.window_bins == n) s.window_segments = 1;

  s.has_range = d.active.test(kRangeChannel);
  if (s.has_range) {
    bool any = false;
    for (int j = 0; j < n; ++j) {
      if (labels[j] == HitType::kOpen) continue;
      const double r = d.channels(kRangeChannel, j) * cfg.r_max;
      s.min_range = any ? std::min(s.min_range, r) : r;
      s.max_range = any ? std::max(s.max_range, r) : r;
      any = true;
    }
    s.range_span = s.max_range - s.min_range;
  }
  if (d.active.test(kGradientChannel) && n > 0) s.mean_gradient = d.channels.row(kGradientChannel).mean();
  return s;
}

void write_descriptor_stats(std::ostream& out, const DescriptorStats& s) {
  out << "bins: " << s.n_bins << "\n"
      << "window bins: " << s.window_bins << "\n"
      << "wall bins: " << s.wall_bins << "\n"
      << "open bins: " << s.open_bins << "\n"
      << "window segments: " << s.window_segments << "\n"
      << "transitions: " << s.transitions << "\n";
  if (s.has_range) {
    out << "range span (m): " << format_double(s.min_range, 2) << " - " << format_double(s.max_range, 2) << " ("
        << format_double(s.range_span, 2) << ")\n"
        << "mean gradient: " << format_double(s.mean_gradient, 4) << "\n";
  } else {
    out << "range span (m): n/a\nmean gradient: n/a\n";
  }
}

}  // namespace compass
