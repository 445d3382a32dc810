#include "compass/matching.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace compass {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

ChannelMask shared_channels(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg) {
  if (a.n_bins() != b.n_bins()) throw std::invalid_argument("descriptor bin counts differ");
  if (a.n_bins() == 0) throw std::invalid_argument("descriptor has no bins");
  const ChannelMask active = cfg.channel_mask & a.active & b.active;
  if (active.none()) throw std::invalid_argument("descriptors share no active channel under the match config");
  return active;
}

std::array<double, kNumChannels> normalized_weights(const ChannelMask& active, const MatchConfig& cfg) {
  std::array<double, kNumChannels> w{};
  double total = 0.0;
  for (int c = 0; c < kNumChannels; ++c) {
    if (active[c]) total += cfg.channel_weights[c];
  }
  if (!(total > 0.0)) throw std::invalid_argument("active channels carry zero total weight");
  for (int c = 0; c < kNumChannels; ++c) w[c] = active[c] ? cfg.channel_weights[c] / total : 0.0;
  return w;
}

double clamp_score(double s) { return std::clamp(s, -1.0, 1.0); }

// Cosine with the zero-row convention.
double cosine(double dot, double norm_a, double norm_b) {
  const bool za = norm_a == 0.0;
  const bool zb = norm_b == 0.0;
  if (za && zb) return 1.0;
  if (za || zb) return 0.0;
  return dot / (norm_a * norm_b);
}

}  // namespace

void MatchConfig::validate() const {
  if (channel_mask.none()) throw std::invalid_argument("match config needs at least one active channel");
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  for (double w : channel_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("channel weights must be non-negative");
  }
  if (prefilter_tolerance && *prefilter_tolerance < 0) throw std::invalid_argument("prefilter tolerance must be >= 0");
}

double similarity_at_shift(const RadialDescriptor& a, const RadialDescriptor& b, int shift, const MatchConfig& cfg) {
  const ChannelMask active = shared_channels(a, b, cfg);
  const int n = a.n_bins();
  const int s = positive_mod(shift, n);

  std::array<double, kNumChannels> dots{}, na{}, nb{};
  for (int c = 0; c < kNumChannels; ++c) {
    if (!active[c]) continue;
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += a.channels(c, (j + s) % n) * b.channels(c, j);
    dots[c] = dot;
    na[c] = a.channels.row(c).norm();
    nb[c] = b.channels.row(c).norm();
  }

  if (cfg.flattened) {
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (int c = 0; c < kNumChannels; ++c) {
      if (!active[c]) continue;
      dot += dots[c];
      sa += na[c] * na[c];
      sb += nb[c] * nb[c];
    }
    return clamp_score(cosine(dot, std::sqrt(sa), std::sqrt(sb)));
  }

  const auto w = normalized_weights(active, cfg);
  double score = 0.0;
  for (int c = 0; c < kNumChannels; ++c) {
    if (active[c]) score += w[c] * cosine(dots[c], na[c], nb[c]);
  }
  return clamp_score(score);
}

int argmax_shift(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("empty score vector");
  const double best = *std::max_element(scores.begin(), scores.end());
  for (size_t s = 0; s < scores.size(); ++s) {
    if (scores[s] >= best - kScoreTieTolerance) return static_cast<int>(s);
  }
  return 0;
}

struct CircularCorrelator::Impl {
  using Complex = std::complex<double>;

  struct Spectra {
    std::array<std::vector<Complex>, kNumChannels> rows;
    std::array<double, kNumChannels> norms{};
  };

  int n;
  int n_freq;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::vector<double> real_in;
  std::vector<Complex> accum;
  std::vector<double> real_out;
  Spectra spectra_a, spectra_b;

  explicit Impl(int n_bins) : n(n_bins), n_freq(n_bins / 2 + 1), real_in(n_bins), accum(n_freq), real_out(n_bins) {
    for (auto& row : spectra_a.rows) row.resize(n_freq);
    for (auto& row : spectra_b.rows) row.resize(n_freq);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    // ESTIMATE keeps the chosen algorithm, and hence the rounding, identical
    // from run to run.
    forward = fftw_plan_dft_r2c_1d(n, real_in.data(), reinterpret_cast<fftw_complex*>(accum.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(accum.data()), real_out.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward || !inverse) throw std::runtime_error("FFT planning failed");
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }

  void transform(const RadialDescriptor& d, const ChannelMask& active, Spectra& out) {
    for (int c = 0; c < kNumChannels; ++c) {
      if (!active[c]) continue;
      for (int j = 0; j < n; ++j) real_in[j] = d.channels(c, j);
      out.norms[c] = d.channels.row(c).norm();
      fftw_execute_dft_r2c(forward, real_in.data(), reinterpret_cast<fftw_complex*>(out.rows[c].data()));
    }
  }

  // Scores for all shifts given spectra of a and b.
  std::vector<double> correlate(const Spectra& sa, const Spectra& sb, const ChannelMask& active,
                                const MatchConfig& cfg) {
    std::fill(accum.begin(), accum.end(), Complex(0.0, 0.0));
    double constant = 0.0;
    double scale = 1.0 / n;

    if (cfg.flattened) {
      double qa = 0.0, qb = 0.0;
      for (int c = 0; c < kNumChannels; ++c) {
        if (!active[c]) continue;
        qa += sa.norms[c] * sa.norms[c];
        qb += sb.norms[c] * sb.norms[c];
      }
      const bool za = qa == 0.0, zb = qb == 0.0;
      if (za || zb) return std::vector<double>(n, (za && zb) ? 1.0 : 0.0);
      for (int c = 0; c < kNumChannels; ++c) {
        if (!active[c]) continue;
        for (int k = 0; k < n_freq; ++k) accum[k] += sa.rows[c][k] * std::conj(sb.rows[c][k]);
      }
      scale /= std::sqrt(qa) * std::sqrt(qb);
    } else {
      const auto w = normalized_weights(active, cfg);
      for (int c = 0; c < kNumChannels; ++c) {
        if (!active[c]) continue;
        const bool za = sa.norms[c] == 0.0, zb = sb.norms[c] == 0.0;
        if (za || zb) {
          if (za && zb) constant += w[c];
          continue;
        }
        const double f = w[c] / (sa.norms[c] * sb.norms[c]);
        for (int k = 0; k < n_freq; ++k) accum[k] += f * (sa.rows[c][k] * std::conj(sb.rows[c][k]));
      }
    }

    fftw_execute_dft_c2r(inverse, reinterpret_cast<fftw_complex*>(accum.data()), real_out.data());
    std::vector<double> scores(n);
    for (int s = 0; s < n; ++s) scores[s] = clamp_score(real_out[s] * scale + constant);
    return scores;
  }
};

CircularCorrelator::CircularCorrelator(int n_bins) : n_(n_bins) {
  if (n_bins <= 0) throw std::invalid_argument("correlator needs a positive bin count");
  impl_ = std::make_unique<Impl>(n_bins);
}

CircularCorrelator::~CircularCorrelator() = default;

std::vector<double> CircularCorrelator::scores(const RadialDescriptor& a, const RadialDescriptor& b,
                                               const MatchConfig& cfg) {
  const ChannelMask active = shared_channels(a, b, cfg);
  if (a.n_bins() != n_) throw std::invalid_argument("correlator bin count differs from descriptors");
  impl_->transform(a, active, impl_->spectra_a);
  impl_->transform(b, active, impl_->spectra_b);
  return impl_->correlate(impl_->spectra_a, impl_->spectra_b, active, cfg);
}

ShiftScore CircularCorrelator::best_shift(const RadialDescriptor& a, const RadialDescriptor& b,
                                          const MatchConfig& cfg) {
  const std::vector<double> s = scores(a, b, cfg);
  const int k = argmax_shift(s);
  return {k, s[k]};
}

ShiftScore best_shift_fft(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg) {
  CircularCorrelator correlator(a.n_bins());
  return correlator.best_shift(a, b, cfg);
}

std::vector<double> correlation_curve(const RadialDescriptor& a, const RadialDescriptor& b, const MatchConfig& cfg) {
  CircularCorrelator correlator(a.n_bins());
  return correlator.scores(a, b, cfg);
}

std::vector<MatchResult> match_query(const RadialDescriptor& query, const DescriptorDatabase& db,
                                     const MatchConfig& cfg) {
  cfg.validate();
  if (db.empty()) throw EmptyResultError("descriptor database is empty");
  const int n = query.n_bins();
  if (n != db.config.n_bins) throw std::invalid_argument("query bin count differs from database");

  std::vector<size_t> candidates;
  candidates.reserve(db.size());
  for (size_t i = 0; i < db.size(); ++i) {
    if (cfg.prefilter_tolerance &&
        std::abs(db.entries[i].descriptor.transition_count - query.transition_count) > *cfg.prefilter_tolerance) {
      continue;
    }
    candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw EmptyFilterError("transition-signature pre-filter removed every candidate (query signature " +
                           std::to_string(query.transition_count) + ")");
  }

  std::vector<MatchResult> results(candidates.size());
  const int n_threads = std::max(1, std::min<int>(cfg.num_threads, static_cast<int>(candidates.size())));

  auto work = [&](int t) {
    CircularCorrelator correlator(n);
    auto& impl = *correlator.impl_;
    ChannelMask prepared_for;
    bool have_query = false;
    for (size_t k = t; k < candidates.size(); k += n_threads) {
      const size_t i = candidates[k];
      const RadialDescriptor& cand = db.entries[i].descriptor;
      const ChannelMask active = shared_channels(cand, query, cfg);
      if (!have_query || active != prepared_for) {
        impl.transform(query, active, impl.spectra_b);
        prepared_for = active;
        have_query = true;
      }
      impl.transform(cand, active, impl.spectra_a);
      const std::vector<double> scores = impl.correlate(impl.spectra_a, impl.spectra_b, active, cfg);
      const int shift = argmax_shift(scores);
      MatchResult& r = results[k];
      r.candidate_index = i;
      r.position = db.entries[i].position;
      r.best_shift = shift;
      r.yaw = normalize_angle(db.grid.yaw_anchor + kTwoPi * shift / n);
      r.score = scores[shift];
    }
  };

  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> workers;
    for (int t = 0; t < n_threads; ++t) workers.emplace_back(work, t);
  }

  std::stable_sort(results.begin(), results.end(), [](const MatchResult& x, const MatchResult& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.candidate_index < y.candidate_index;
  });
  if (results.size() > static_cast<size_t>(cfg.top_k)) results.resize(cfg.top_k);
  return results;
}

Agreement hit_type_agreement(const RadialDescriptor& a, const RadialDescriptor& b, int shift) {
  if (a.n_bins() != b.n_bins()) throw std::invalid_argument("descriptor bin counts differ");
  const int n = a.n_bins();
  if (n == 0) return {};
  const auto la = hit_labels(a);
  const auto lb = hit_labels(b);
  const int s = positive_mod(shift, n);
  Agreement out;
  for (int j = 0; j < n; ++j) {
    if (la[(j + s) % n] == lb[j]) ++out.agree_bins;
  }
  out.fraction = static_cast<double>(out.agree_bins) / n;
  return out;
}

}  // namespace compass
