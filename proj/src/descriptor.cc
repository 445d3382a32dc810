#include "compass/descriptor.h"

#include <cmath>

#include "compass/common.h"

namespace compass {

HitType hit_type_from_value(double v) {
  if (v >= 0.75) return HitType::kWall;
  if (v >= 0.25) return HitType::kWindow;
  return HitType::kOpen;
}

RadialDescriptor cyclic_shift(const RadialDescriptor& d, int k) {
  RadialDescriptor out = d;
  const int n = d.n_bins();
  if (n == 0) return out;
  for (int j = 0; j < n; ++j) {
    out.channels.col(j) = d.channels.col(positive_mod(j + k, n));
  }
  return out;
}

Eigen::VectorXd cyclic_shift(const Eigen::VectorXd& row, int k) {
  const int n = static_cast<int>(row.size());
  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) out[j] = row[positive_mod(j + k, n)];
  return out;
}

std::vector<HitType> hit_labels(const RadialDescriptor& d) {
  std::vector<HitType> labels(d.n_bins());
  for (int j = 0; j < d.n_bins(); ++j) labels[j] = hit_type_from_value(d.channels(kHitTypeChannel, j));
  return labels;
}

int transition_signature(const std::vector<HitType>& labels) {
  const size_t n = labels.size();
  int count = 0;
  for (size_t j = 0; j < n; ++j) {
    if (labels[j] != labels[(j + 1) % n]) ++count;
  }
  return count;
}

int transition_signature(const RadialDescriptor& d) { return transition_signature(hit_labels(d)); }

}  // namespace compass
