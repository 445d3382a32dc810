#ifndef COMPASS_REPORTS_H_
#define COMPASS_REPORTS_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "compass/descriptor.h"
#include "compass/raycast.h"

namespace compass {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// "# compass <version> <command>" followed by one "# key: value" line per
// entry. Every text output starts with this block.
std::string make_header(const std::string& command, const ConfigEntries& config);

std::string format_double(double v, int digits = 6);

struct CorrelationSummary {
  int peak_shift = 0;
  double peak_yaw_deg = 0.0;
  double peak_score = 0.0;
};

CorrelationSummary summarize_correlation(const std::vector<double>& curve, double yaw_anchor);

// Columns shift,yaw_deg,score; the peak is echoed in a comment line.
void write_correlation_csv(std::ostream& out, const std::vector<double>& curve, double yaw_anchor,
                           const std::string& header);

struct BinAgreement {
  int bin = 0;
  HitType camera = HitType::kWall;
  HitType map = HitType::kWall;
  bool agree = false;
};

struct DegreeInterval {
  double start_deg = 0.0;
  double end_deg = 0.0;  // may be below start_deg when the arc wraps through 0
};

struct AgreementReport {
  std::vector<BinAgreement> bins;
  int agree_count = 0;
  int total = 0;
  double fraction = 0.0;
  std::vector<DegreeInterval> disagreement_arcs;
};

/**
 * Per-bin label comparison of a visual descriptor with a map descriptor
 * aligned by `shift` (as returned by matching): camera bin j is compared with
 * map bin (j + shift) mod n. Throws std::invalid_argument on a bin-count
 * mismatch.
 */
AgreementReport agreement_report(const RadialDescriptor& d_vis, const RadialDescriptor& d_map, int shift);

// "231 out of 360 bins (64%)".
std::string format_agreement(const AgreementReport& report);

void write_agreement_csv(std::ostream& out, const AgreementReport& report, const std::string& header);

struct DescriptorStats {
  int n_bins = 0;
  int window_bins = 0;
  int wall_bins = 0;
  int open_bins = 0;
  int transitions = 0;
  int window_segments = 0;  // contiguous window runs
  bool has_range = false;   // range channels active
  double min_range = 0.0;   // meters, over wall and window hits
  double max_range = 0.0;
  double range_span = 0.0;
  double mean_gradient = 0.0;
};

DescriptorStats descriptor_stats(const RadialDescriptor& d, const RaycastConfig& cfg);
void write_descriptor_stats(std::ostream& out, const DescriptorStats& stats);

const char* label_name(HitType h);

}  // namespace compass

#endif  // COMPASS_REPORTS_H_
