#include "compass/synth.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <thread>

#include "compass/fisheye.h"

namespace compass {
namespace {

struct Rect {
  double x0, y0, x1, y1;  // meters, x0 < x1, y0 < y1
};

class PlanPainter {
 public:
  PlanPainter(FloorPlanRaster& raster, double height) : raster_(raster), height_(height) {}

  template <typename Fn>
  void for_pixels(const Rect& r, Fn&& fn) {
    const double res = raster_.resolution();
    // Pixel col covers [col * res, (col + 1) * res); its center is inside r
    // when col + 0.5 in [x0 / res, x1 / res).
    const int c0 = std::max(0, static_cast<int>(std::ceil(r.x0 / res - 0.5)));
    const int c1 = std::min(raster_.width() - 1, static_cast<int>(std::ceil(r.x1 / res - 0.5)) - 1);
    const int r0 = std::max(0, static_cast<int>(std::ceil((height_ - r.y1) / res - 0.5)));
    const int r1 = std::min(raster_.height() - 1, static_cast<int>(std::ceil((height_ - r.y0) / res - 0.5)) - 1);
    for (int row = r0; row <= r1; ++row) {
      for (int col = c0; col <= c1; ++col) fn(col, row);
    }
  }

  void wall(const Rect& r, bool value = true) {
    for_pixels(r, [&](int c, int row) { raster_.set_wall(c, row, value); });
  }
  void window(const Rect& r) {
    for_pixels(r, [&](int c, int row) { raster_.set_window(c, row, true); });
  }

 private:
  FloorPlanRaster& raster_;
  double height_;
};

void partition(PlanPainter& painter, const Rect& room, int depth, const SynthPlanSpec& spec, std::mt19937_64& rng) {
  if (depth <= 0) return;
  const double w = room.x1 - room.x0, h = room.y1 - room.y0;
  const bool vertical_wall = w >= h;  // split the longer side
  const double len = vertical_wall ? w : h;
  if (len < 2.0 * spec.min_room_size) return;
  const double span = vertical_wall ? h : w;
  const double door = spec.doorways.width;
  const double clear = spec.doorways.end_clearance;
  if (span < door + 2.0 * clear) return;

  std::uniform_real_distribution<double> pos_dist(spec.min_room_size, len - spec.min_room_size);
  const double pos = (vertical_wall ? room.x0 : room.y0) + pos_dist(rng);
  std::uniform_real_distribution<double> door_dist(clear, span - clear - door);
  const double door_start = (vertical_wall ? room.y0 : room.x0) + door_dist(rng);
  const double half = 0.5 * spec.wall_thickness;

  if (vertical_wall) {
    painter.wall({pos - half, room.y0, pos + half, room.y1});
    painter.wall({pos - half, door_start, pos + half, door_start + door}, false);
    partition(painter, {room.x0, room.y0, pos - half, room.y1}, depth - 1, spec, rng);
    partition(painter, {pos + half, room.y0, room.x1, room.y1}, depth - 1, spec, rng);
  } else {
    painter.wall({room.x0, pos - half, room.x1, pos + half});
    painter.wall({door_start, pos - half, door_start + door, pos + half}, false);
    partition(painter, {room.x0, room.y0, room.x1, pos - half}, depth - 1, spec, rng);
    partition(painter, {room.x0, pos + half, room.x1, room.y1}, depth - 1, spec, rng);
  }
}

// Window intervals [start, end) along a facade of the given length.
std::vector<std::pair<double, double>> place_windows(double length, const SynthPlanSpec& spec, std::mt19937_64& rng) {
  const WindowRules& rules = spec.windows;
  std::vector<std::pair<double, double>> out;
  if (rules.facade_fraction <= 0.0) return out;
  const double usable = length - 2.0 * (rules.corner_clearance + spec.wall_thickness);
  const double target = rules.facade_fraction * length;
  if (rules.min_width > usable) throw std::invalid_argument("window wider than facade");
  if (target > usable) throw std::invalid_argument("window fraction exceeds usable facade length");

  std::uniform_real_distribution<double> width_dist(rules.min_width, rules.max_width);
  std::vector<double> widths;
  double total = 0.0;
  for (;;) {
    const double w = width_dist(rng);
    if (total + w > target) {
      const double rest = target - total;
      if (rest >= rules.min_width) {
        widths.push_back(rest);
        total += rest;
      }
      break;
    }
    widths.push_back(w);
    total += w;
  }
  if (widths.empty()) return out;

  std::uniform_real_distribution<double> gap_dist(0.2, 1.0);
  std::vector<double> gaps(widths.size() + 1);
  double gap_sum = 0.0;
  for (double& g : gaps) gap_sum += (g = gap_dist(rng));
  const double free = usable - total;
  double cursor = rules.corner_clearance + spec.wall_thickness;
  for (size_t i = 0; i < widths.size(); ++i) {
    cursor += free * gaps[i] / gap_sum;
    out.emplace_back(cursor, cursor + widths[i]);
    cursor += widths[i];
  }
  return out;
}

// Booth's least-rotation algorithm.
size_t least_rotation(const std::vector<uint8_t>& s) {
  const size_t n = s.size();
  std::vector<long> f(2 * n, -1);
  size_t k = 0;
  auto at = [&](size_t i) { return s[i % n]; };
  for (size_t j = 1; j < 2 * n; ++j) {
    long i = f[j - k - 1];
    while (i != -1 && at(j) != at(k + i + 1)) {
      if (at(j) < at(k + i + 1)) k = j - i - 1;
      i = f[i];
    }
    if (i == -1 && at(j) != at(k + i + 1)) {
      if (at(j) < at(k + i + 1)) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k % n;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void SynthPlanSpec::validate() const {
  if (!(width > 0.0 && height > 0.0)) throw std::invalid_argument("plan dimensions must be positive");
  if (!(resolution > 0.0)) throw std::invalid_argument("plan resolution must be positive");
  if (!(wall_thickness >= resolution)) throw std::invalid_argument("wall thickness must be at least one pixel");
  if (partition_depth < 0) throw std::invalid_argument("partition depth must be non-negative");
  if (!(min_room_size > 0.0)) throw std::invalid_argument("minimum room size must be positive");
  if (!(windows.facade_fraction >= 0.0 && windows.facade_fraction <= 1.0)) {
    throw std::invalid_argument("window facade fraction must lie in [0, 1]");
  }
  if (!(windows.min_width > 0.0 && windows.min_width <= windows.max_width)) {
    throw std::invalid_argument("window widths must satisfy 0 < min <= max");
  }
  if (!(windows.corner_clearance >= 0.0)) throw std::invalid_argument("corner clearance must be non-negative");
  if (!(doorways.width > 0.0 && doorways.end_clearance >= 0.0)) throw std::invalid_argument("invalid doorway rules");
}

FloorPlanRaster generate_plan(const SynthPlanSpec& spec, uint64_t seed) {
  spec.validate();
  const int w_px = static_cast<int>(std::lround(spec.width / spec.resolution));
  const int h_px = static_cast<int>(std::lround(spec.height / spec.resolution));
  FloorPlanRaster raster(w_px, h_px, spec.resolution,
                         {0.5 * spec.resolution, spec.height - 0.5 * spec.resolution});
  PlanPainter painter(raster, spec.height);
  std::mt19937_64 rng(seed);
  const double t = spec.wall_thickness, W = spec.width, H = spec.height;

  painter.wall({0, 0, W, t});
  painter.wall({0, H - t, W, H});
  painter.wall({0, 0, t, H});
  painter.wall({W - t, 0, W, H});

  partition(painter, {t, t, W - t, H - t}, spec.partition_depth, spec, rng);

  for (const auto& [a, b] : place_windows(W, spec, rng)) painter.window({a, 0, b, t});
  for (const auto& [a, b] : place_windows(W, spec, rng)) painter.window({a, H - t, b, H});
  for (const auto& [a, b] : place_windows(H, spec, rng)) painter.window({0, a, t, b});
  for (const auto& [a, b] : place_windows(H, spec, rng)) painter.window({W - t, a, W, b});
  return raster;
}

void ObservationNoise::validate() const {
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1]");
  if (!(spurious_rate >= 0.0)) throw std::invalid_argument("spurious rate must be non-negative");
  if (spurious_min_bins < 1 || spurious_max_bins < spurious_min_bins) {
    throw std::invalid_argument("spurious span widths must satisfy 1 <= min <= max");
  }
  if (!(jitter_deg >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
}

RadialDescriptor simulate_observation(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                                      const ObservationNoise& noise, uint64_t seed, ObservationMode mode) {
  noise.validate();
  if (raster.classify_world(pose.position()) != Cell::kOpen) {
    throw std::invalid_argument("observation pose lies inside a structure pixel");
  }
  const std::vector<RayHit> hits = cast_rays(raster, pose, cfg);
  const int n = cfg.n_bins;

  // Window runs as [start, end) in bin units, bin j covering [j - 0.5, j + 0.5).
  std::vector<std::pair<double, double>> runs;
  int first_non_window = -1;
  for (int j = 0; j < n; ++j) {
    if (hits[j].hit_type != HitType::kWindow) {
      first_non_window = j;
      break;
    }
  }
  if (first_non_window < 0) {
    runs.emplace_back(-0.5, n - 0.5);
  } else {
    for (int k = 1; k <= n; ++k) {
      const int j = (first_non_window + k) % n;
      if (hits[j].hit_type != HitType::kWindow) continue;
      int len = 0;
      while (len < n && hits[(first_non_window + k + len) % n].hit_type == HitType::kWindow) ++len;
      const double start = first_non_window + k - 0.5;
      runs.emplace_back(start, start + len);
      k += len - 1;
    }
  }

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(noise.dropout);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double bins_per_deg = n / 360.0;
  std::vector<std::pair<double, double>> spans;
  for (auto [s, e] : runs) {
    if (drop(rng)) continue;
    if (noise.jitter_deg > 0.0) {
      const double offset = jitter(rng) * noise.jitter_deg * bins_per_deg;
      s += offset;
      e += offset;
    }
    s -= noise.dilation_bins;
    e += noise.dilation_bins;
    if (e - s > 0.0) spans.emplace_back(s, e);
  }
  if (noise.spurious_rate > 0.0) {
    std::poisson_distribution<int> count(noise.spurious_rate);
    std::uniform_real_distribution<double> center(0.0, n);
    std::uniform_int_distribution<int> width(noise.spurious_min_bins, noise.spurious_max_bins);
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      const double c = center(rng);
      const double w = width(rng);
      spans.emplace_back(c - 0.5 * w, c + 0.5 * w);
    }
  }

  // Inset by a small margin so that exact bin-boundary edges survive the
  // conversion to radians without rounding into a neighbor bin.
  constexpr double kInset = 1e-6;
  const double rad_per_bin = kTwoPi / n;
  std::vector<AzimuthSpan> arcs;
  for (const auto& [s, e] : spans) {
    if (e - s <= 2.0 * kInset) continue;
    arcs.push_back({normalize_angle((s + kInset) * rad_per_bin), std::min(kTwoPi, (e - s - 2.0 * kInset) * rad_per_bin)});
  }
  const std::vector<double> row = spans_to_hit_type(arcs, n);

  RadialDescriptor d;
  if (mode == ObservationMode::kAllChannels) {
    d = encode_descriptor(hits, cfg);
    d.active = kAllChannels;
  } else {
    d = RadialDescriptor(n);
    d.active = kHitTypeOnly;
  }
  for (int j = 0; j < n; ++j) d.channels(kHitTypeChannel, j) = row[j];
  d.transition_count = transition_signature(d);
  return d;
}

std::vector<uint8_t> canonical_rotation_key(const RadialDescriptor& d) {
  std::vector<uint8_t> labels;
  labels.reserve(d.n_bins());
  for (HitType h : hit_labels(d)) labels.push_back(h == HitType::kWindow ? 2 : 1);
  if (labels.empty()) return labels;
  std::rotate(labels.begin(), labels.begin() + static_cast<long>(least_rotation(labels)), labels.end());
  return labels;
}

std::vector<bool> unique_hit_type_entries(const DescriptorDatabase& db) {
  std::vector<std::vector<uint8_t>> keys;
  keys.reserve(db.size());
  std::map<std::vector<uint8_t>, int> counts;
  for (const auto& e : db.entries) {
    keys.push_back(canonical_rotation_key(e.descriptor));
    ++counts[keys.back()];
  }
  std::vector<bool> unique(db.size());
  for (size_t i = 0; i < db.size(); ++i) unique[i] = counts[keys[i]] == 1;
  return unique;
}

EvalReport run_localization_eval(const FloorPlanRaster& raster, const DescriptorDatabase& db, const EvalConfig& cfg) {
  if (db.empty()) throw EmptyResultError("database has no candidates");
  if (cfg.trials < 0) throw std::invalid_argument("trial count must be non-negative");
  cfg.noise.validate();
  const std::vector<bool> unique = unique_hit_type_entries(db);
  std::vector<size_t> pool;
  for (size_t i = 0; i < db.size(); ++i) {
    if (!cfg.unique_only || unique[i]) pool.push_back(i);
  }
  if (pool.empty()) throw EmptyResultError("no database entry has a unique hit-type row");

  MatchConfig match = cfg.match;
  match.top_k = static_cast<int>(db.size());
  match.num_threads = 1;
  const int n = db.config.n_bins;

  EvalReport report;
  report.records.resize(cfg.trials);
  auto run_trial = [&](int t) {
    std::mt19937_64 rng(split_seed(cfg.seed, static_cast<uint64_t>(t)));
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    const size_t idx = pool[pick(rng)];
    double yaw;
    if (cfg.yaw_sampling == YawSampling::kBinned) {
      std::uniform_int_distribution<int> bin(0, n - 1);
      yaw = db.grid.yaw_anchor + kTwoPi * bin(rng) / n;
    } else {
      std::uniform_real_distribution<double> angle(0.0, kTwoPi);
      yaw = angle(rng);
    }
    const uint64_t obs_seed = rng();

    TrialRecord rec;
    rec.trial = t;
    rec.true_index = idx;
    rec.unique = unique[idx];
    const Eigen::Vector2d p = db.entries[idx].position;
    rec.true_pose = Pose2D(p.x(), p.y(), yaw);
    const RadialDescriptor obs = simulate_observation(raster, rec.true_pose, db.config, cfg.noise, obs_seed, cfg.mode);

    std::vector<MatchResult> results;
    try {
      results = match_query(obs, db, match);
    } catch (const EmptyFilterError&) {
    }
    rec.rank = static_cast<int>(db.size()) + 1;
    if (results.empty()) {
      rec.estimated_pose = Pose2D(std::nan(""), std::nan(""), 0.0);
      rec.yaw_error_deg = rec.true_cell_yaw_error_deg = 180.0;
      rec.position_error_m = std::nan("");
      report.records[t] = rec;
      return;
    }
    const MatchResult& top = results.front();
    rec.estimated_pose = Pose2D(top.position.x(), top.position.y(), top.yaw);
    rec.score = top.score;
    rec.yaw_error_deg = rad_to_deg(std::abs(wrap_to_pi(top.yaw - rec.true_pose.yaw)));
    rec.position_error_m = (top.position - p).norm();
    rec.true_cell_yaw_error_deg = 180.0;
    for (size_t r = 0; r < results.size(); ++r) {
      if (results[r].candidate_index == idx) {
        rec.rank = static_cast<int>(r) + 1;
        rec.true_cell_yaw_error_deg = rad_to_deg(std::abs(wrap_to_pi(results[r].yaw - rec.true_pose.yaw)));
        break;
      }
    }
    report.records[t] = rec;
  };

  const int threads = std::clamp(cfg.num_threads, 1, std::max(1, cfg.trials));
  if (threads == 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::vector<std::jthread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (int t = w; t < cfg.trials; t += threads) run_trial(t);
      });
    }
  }
  report.summary = summarize(report.records, db.grid.step);
  return report;
}

EvalSummary summarize(const std::vector<TrialRecord>& records, double grid_step) {
  EvalSummary s;
  s.trials = static_cast<int>(records.size());
  if (records.empty()) return s;
  std::vector<double> yaw, pos, true_yaw;
  int rank1 = 0, yaw_ok = 0, pos_ok = 0, true_ok = 0;
  for (const auto& r : records) {
    s.unique_trials += r.unique ? 1 : 0;
    rank1 += r.rank == 1;
    yaw_ok += r.yaw_error_deg < 0.5;
    pos_ok += r.position_error_m <= 0.5 * grid_step;
    true_ok += r.true_cell_yaw_error_deg < 2.0;
    yaw.push_back(r.yaw_error_deg);
    pos.push_back(std::isnan(r.position_error_m) ? std::numeric_limits<double>::infinity() : r.position_error_m);
    true_yaw.push_back(r.true_cell_yaw_error_deg);
  }
  const double n = static_cast<double>(records.size());
  s.rank1_rate = rank1 / n;
  s.yaw_success_rate = yaw_ok / n;
  s.position_success_rate = pos_ok / n;
  s.true_cell_yaw_rate_2deg = true_ok / n;
  s.median_yaw_error_deg = median(yaw);
  s.median_position_error_m = median(pos);
  s.median_true_cell_yaw_error_deg = median(true_yaw);
  return s;
}

void write_eval_csv(std::ostream& out, const EvalReport& report, const std::string& header) {
  out << header;
  out << "trial,true_index,true_x,true_y,true_yaw_deg,est_x,est_y,est_yaw_deg,rank,yaw_error_deg,"
         "position_error_m,true_cell_yaw_error_deg,score,unique\n";
  for (const auto& r : report.records) {
    out << r.trial << ',' << r.true_index << ',' << fixed(r.true_pose.x) << ',' << fixed(r.true_pose.y) << ','
        << fixed(rad_to_deg(r.true_pose.yaw)) << ',' << fixed(r.estimated_pose.x) << ',' << fixed(r.estimated_pose.y)
        << ',' << fixed(rad_to_deg(r.estimated_pose.yaw)) << ',' << r.rank << ',' << fixed(r.yaw_error_deg) << ','
        << fixed(r.position_error_m) << ',' << fixed(r.true_cell_yaw_error_deg) << ',' << fixed(r.score, 9) << ','
        << (r.unique ? 1 : 0) << '\n';
  }
}

void write_eval_summary(std::ostream& out, const EvalSummary& s) {
  out << "trials: " << s.trials << " (unique hit-type rows: " << s.unique_trials << ")\n"
      << "rank-1 rate: " << fixed(s.rank1_rate, 4) << "\n"
      << "yaw error < 0.5 deg: " << fixed(s.yaw_success_rate, 4) << "\n"
      << "position within half a cell: " << fixed(s.position_success_rate, 4) << "\n"
      << "true-cell yaw error < 2 deg: " << fixed(s.true_cell_yaw_rate_2deg, 4) << "\n"
      << "median yaw error (deg): " << fixed(s.median_yaw_error_deg, 4) << "\n"
      << "median position error (m): " << fixed(s.median_position_error_m, 4) << "\n"
      << "median true-cell yaw error (deg): " << fixed(s.median_true_cell_yaw_error_deg, 4) << "\n";
}

}  // namespace compass
