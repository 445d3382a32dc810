#ifndef COMPASS_DESCRIPTOR_H_
#define COMPASS_DESCRIPTOR_H_

#include <Eigen/Core>
#include <bitset>
#include <vector>

namespace compass {

inline constexpr int kNumChannels = 5;

enum Channel : int {
  kRangeChannel = 0,
  kHitTypeChannel = 1,
  kGradientChannel = 2,
  kInverseRangeChannel = 3,
  kVarianceChannel = 4,
};

enum class HitType : uint8_t { kOpen = 0, kWall = 1, kWindow = 2 };

using ChannelMask = std::bitset<kNumChannels>;
inline const ChannelMask kAllChannels{0b11111};
inline const ChannelMask kHitTypeOnly{0b00010};

// Channel-1 encoding: wall 1.0, window 0.5, open 0.0.
inline double hit_type_value(HitType h) {
  switch (h) {
    case HitType::kWall: return 1.0;
    case HitType::kWindow: return 0.5;
    case HitType::kOpen: return 0.0;
  }
  return 0.0;
}

// Nearest label to a channel-1 value.
HitType hit_type_from_value(double v);

using ChannelMatrix = Eigen::Matrix<double, kNumChannels, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * Five-channel radial descriptor, one column per azimuth bin.
 *
 * Column j corresponds to bearing heading + 2*pi*j/n_bins (counterclockwise
 * in the world frame). `active` marks the channels that carry evidence; the
 * visual descriptor only populates the hit-type row.
 */
struct RadialDescriptor {
  ChannelMatrix channels;
  ChannelMask active = kAllChannels;
  int transition_count = 0;

  RadialDescriptor() = default;
  explicit RadialDescriptor(int n_bins) : channels(ChannelMatrix::Zero(kNumChannels, n_bins)) {}

  int n_bins() const { return static_cast<int>(channels.cols()); }
};

// out[:, j] = in[:, (j + k) mod n]. A heading increase of k bins produces
// exactly this shift.
RadialDescriptor cyclic_shift(const RadialDescriptor& d, int k);
Eigen::VectorXd cyclic_shift(const Eigen::VectorXd& row, int k);

std::vector<HitType> hit_labels(const RadialDescriptor& d);

// Number of j with label(j) != label((j + 1) mod n). Invariant under cyclic
// shifts; even when only two labels occur.
int transition_signature(const RadialDescriptor& d);
int transition_signature(const std::vector<HitType>& labels);

}  // namespace compass

#endif  // COMPASS_DESCRIPTOR_H_
