#ifndef COMPASS_MATCHING_H_
#define COMPASS_MATCHING_H_

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "compass/descriptor.h"
#include "compass/raycast.h"

namespace compass {

struct MatchConfig {
  // Per-channel weights; renormalized over the channels actually compared.
  std::array<double, kNumChannels> channel_weights{0.2, 0.2, 0.2, 0.2, 0.2};
  ChannelMask channel_mask = kAllChannels;
  // Drop candidates whose transition count differs from the query's by more
  // than this. Disabled when empty.
  std::optional<int> prefilter_tolerance;
  int top_k = 10;
  // Single cosine over the concatenated active rows instead of a weighted
  // sum of per-channel cosines.
  bool flattened = false;
  int num_threads = 1;

  void validate() const;
};

struct MatchResult {
  size_t candidate_index = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  int best_shift = 0;     // bins, in [0, n_bins)
  double yaw = 0.0;       // yaw_anchor + 2*pi*best_shift/n_bins, in [0, 2*pi)
  double score = 0.0;     // in [-1, 1]
};

struct ShiftScore {
  int shift = 0;
  double score = 0.0;
};

// Scores within this distance of the maximum count as tied; ties resolve to
// the smallest shift.
inline constexpr double kScoreTieTolerance = 1e-12;

/**
 * Similarity of `b` against `a` rotated by `shift` bins:
 *
 *   sum_c w_c * cos(cyclic_shift(a_c, shift), b_c)
 *
 * over channels active in the config and in both descriptors, with weights
 * renormalized to sum to one. Two all-zero rows score 1, exactly one
 * all-zero row scores 0. The score peaks at `shift = k` when
 * b == cyclic_shift(a, k). Throws std::invalid_argument on shape mismatch or
 * when no channel is shared.
 */
double similarity_at_shift(const RadialDescriptor& a, const RadialDescriptor& b, int shift,
                           const MatchConfig& cfg);

// Index of the maximum (smallest index among ties).
int argmax_shift(const std::vector<double>& scores);

/**
 * Circular cross-correlation of descriptor pairs in the frequency domain.
 *
 * Owns FFT plans and scratch buffers for one bin count; not thread-safe, use
 * one instance per worker.
 */
class CircularCorrelator {
 public:
  explicit CircularCorrelator(int n_bins);
  ~CircularCorrelator();
  CircularCorrelator(const CircularCorrelator&) = delete;
  CircularCorrelator& operator=(const CircularCorrelator&) = delete;

  int n_bins() const { return n_; }

  // similarity_at_shift for every shift 0..n-1.
  std::vector<double> scores(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg);
  ShiftScore best_shift(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg);

 private:
  friend std::vector<MatchResult> match_query(const RadialDescriptor& query, const DescriptorDatabase& db,
                                              const MatchConfig& cfg);
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

ShiftScore best_shift_fft(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg);
std::vector<double> correlation_curve(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg);

/**
 * Ranks database candidates for a query.
 *
 * Each candidate is scored with best_shift_fft(candidate, query), so
 * best_shift is the heading of the query relative to the database yaw
 * anchor, in bins. Results are sorted by descending score, ties by candidate
 * index, truncated to top_k. Throws EmptyResultError for an empty database
 * and EmptyFilterError when the pre-filter rejects every candidate.
 */
class EmptyFilterError : public EmptyResultError {
 public:
  using EmptyResultError::EmptyResultError;
};

std::vector<MatchResult> match_query(const RadialDescriptor& query, const DescriptorDatabase& db,
                                     const MatchConfig& cfg);

struct Agreement {
  int agree_bins = 0;
  double fraction = 0.0;
};

// Bins whose hit-type labels agree between cyclic_shift(a, shift) and b.
Agreement hit_type_agreement(const RadialDescriptor& a, const RadialDescriptor& b, int shift);

}  // namespace compass

#endif  // COMPASS_MATCHING_H_
