#include "compass/raycast.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

namespace compass {
namespace {

constexpr int64_t kHeadingSubdivisions = int64_t{1} << 20;

HitType to_hit_type(Cell c) {
  switch (c) {
    case Cell::kWall: return HitType::kWall;
    case Cell::kWindow: return HitType::kWindow;
    case Cell::kOpen: break;
  }
  return HitType::kOpen;
}

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void RaycastConfig::validate() const {
  if (n_bins < 8) throw std::invalid_argument("n_bins must be >= 8");
  if (!(step > 0.0) || !(step <= r_max)) throw std::invalid_argument("step must satisfy 0 < step <= r_max");
  if (!(r_clip > 0.0)) throw std::invalid_argument("r_clip must be positive");
  if (!(sigma_clip > 0.0)) throw std::invalid_argument("sigma_clip must be positive");
  if (var_halfwidth < 1) throw std::invalid_argument("var_halfwidth must be >= 1");
}

int RaycastConfig::num_samples() const {
  // Largest i with i * step < r_max, guarding against r_max / step landing a
  // hair below an integer.
  const double ratio = r_max / step;
  const double nearest = std::round(ratio);
  const int64_t below = std::abs(ratio - nearest) < 1e-9 ? static_cast<int64_t>(nearest) - 1
                                                          : static_cast<int64_t>(std::floor(ratio));
  return static_cast<int>(std::max<int64_t>(below, 0));
}

RayHit cast_ray(const FloorPlanRaster& raster, const Eigen::Vector2d& origin, double bearing,
                const RaycastConfig& cfg, RaycastStats* stats) {
  const Eigen::Vector2d start = raster.world_to_pixel(origin);
  const double u0 = start.x() + 0.5;
  const double v0 = start.y() + 0.5;

  const Cell at_origin = raster.classify(static_cast<int>(std::floor(u0)), static_cast<int>(std::floor(v0)));
  if (at_origin != Cell::kOpen) {
    if (stats) {
      ++stats->rays;
      ++stats->probes;
    }
    return {cfg.step, to_hit_type(at_origin)};
  }

  const double du = cfg.step * std::cos(bearing) / raster.resolution();
  const double dv = -cfg.step * std::sin(bearing) / raster.resolution();
  const int n = cfg.num_samples();
  const int width = raster.width();
  const int height = raster.height();
  const uint8_t* cells = raster.cells().data();

  RayHit hit{cfg.r_max, HitType::kOpen};
  int probes = 0;
  for (int i = 1; i <= n; ++i) {
    ++probes;
    const int col = static_cast<int>(std::floor(u0 + i * du));
    const int row = static_cast<int>(std::floor(v0 + i * dv));
    if (col < 0 || row < 0 || col >= width || row >= height) continue;
    const uint8_t c = cells[static_cast<size_t>(row) * width + col];
    if (c != static_cast<uint8_t>(Cell::kOpen)) {
      hit = {i * cfg.step, to_hit_type(static_cast<Cell>(c))};
      break;
    }
  }
  if (stats) {
    ++stats->rays;
    stats->probes += static_cast<uint64_t>(probes);
  }
  return hit;
}

double ray_bearing(double heading, int j, int n_bins) {
  const double bins = normalize_angle(heading) * n_bins / kTwoPi;
  const int64_t q = std::llround(bins * kHeadingSubdivisions);
  const int64_t base = floor_div(q, kHeadingSubdivisions);
  const double frac = static_cast<double>(q - base * kHeadingSubdivisions) / kHeadingSubdivisions;
  const int64_t bin = ((base + j) % n_bins + n_bins) % n_bins;
  return kTwoPi * (static_cast<double>(bin) + frac) / n_bins;
}

std::vector<RayHit> cast_rays(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                              RaycastStats* stats) {
  cfg.validate();
  std::vector<RayHit> hits(cfg.n_bins);
  const Eigen::Vector2d origin = pose.position();
  for (int j = 0; j < cfg.n_bins; ++j) {
    hits[j] = cast_ray(raster, origin, ray_bearing(pose.yaw, j, cfg.n_bins), cfg, stats);
  }
  return hits;
}

RadialDescriptor encode_descriptor(const std::vector<RayHit>& hits, const RaycastConfig& cfg) {
  const int n = static_cast<int>(hits.size());
  RadialDescriptor d(n);
  const int w = cfg.var_halfwidth;
  const double count = 2.0 * w + 1.0;
  std::vector<HitType> labels(n);
  for (int j = 0; j < n; ++j) {
    const double r = hits[j].range;
    const double prev = hits[positive_mod(j - 1, n)].range;
    const double next = hits[positive_mod(j + 1, n)].range;
    d.channels(kRangeChannel, j) = r / cfg.r_max;
    d.channels(kHitTypeChannel, j) = hit_type_value(hits[j].hit_type);
    d.channels(kGradientChannel, j) = std::min(std::abs(next - prev) / 2.0 / cfg.r_clip, 1.0);
    d.channels(kInverseRangeChannel, j) = 1.0 / (1.0 + r);

    double sum = 0.0;
    for (int k = -w; k <= w; ++k) sum += hits[positive_mod(j + k, n)].range;
    const double mean = sum / count;
    double sq = 0.0;
    for (int k = -w; k <= w; ++k) {
      const double dev = hits[positive_mod(j + k, n)].range - mean;
      sq += dev * dev;
    }
    d.channels(kVarianceChannel, j) = std::min(std::sqrt(sq / count) / cfg.sigma_clip, 1.0);
    labels[j] = hits[j].hit_type;
  }
  d.active = kAllChannels;
  d.transition_count = transition_signature(labels);
  return d;
}

RadialDescriptor compute_descriptor(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                                    RaycastStats* stats) {
  return encode_descriptor(cast_rays(raster, pose, cfg, stats), cfg);
}

double distance_to_structure(const FloorPlanRaster& raster, const Eigen::Vector2d& p, double max_distance) {
  const Eigen::Vector2d px = raster.world_to_pixel(p);
  const int radius = static_cast<int>(std::ceil(max_distance / raster.resolution())) + 1;
  const int c0 = static_cast<int>(std::floor(px.x() + 0.5));
  const int r0 = static_cast<int>(std::floor(px.y() + 0.5));
  double best_sq = std::numeric_limits<double>::infinity();
  const int row_lo = std::max(r0 - radius, 0), row_hi = std::min(r0 + radius, raster.height() - 1);
  const int col_lo = std::max(c0 - radius, 0), col_hi = std::min(c0 + radius, raster.width() - 1);
  for (int row = row_lo; row <= row_hi; ++row) {
    for (int col = col_lo; col <= col_hi; ++col) {
      if (raster.classify(col, row) == Cell::kOpen) continue;
      const double dx = col - px.x();
      const double dy = row - px.y();
      best_sq = std::min(best_sq, dx * dx + dy * dy);
    }
  }
  const double d = std::sqrt(best_sq) * raster.resolution();
  return d <= max_distance ? d : std::numeric_limits<double>::infinity();
}

FreeSpacePredicate clearance_predicate(double min_clearance) {
  return [min_clearance](const FloorPlanRaster& raster, const Eigen::Vector2d& p) {
    const Eigen::Vector2i px = raster.pixel_of(p);
    if (!raster.in_bounds(px.x(), px.y())) return false;
    if (raster.classify(px.x(), px.y()) != Cell::kOpen) return false;
    return !(distance_to_structure(raster, p, min_clearance) < min_clearance);
  };
}

GridSpec make_grid(const FloorPlanRaster& raster, double grid_step, double yaw_anchor) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
  const double rho = raster.resolution();
  const double extent_x = raster.width() * rho;
  const double extent_y = raster.height() * rho;
  const double x_min = raster.origin().x() - 0.5 * rho;
  const double y_min = raster.origin().y() - (raster.height() - 0.5) * rho;

  GridSpec grid;
  grid.step = grid_step;
  grid.yaw_anchor = normalize_angle(yaw_anchor);
  grid.nx = std::max(1, static_cast<int>(std::floor(extent_x / grid_step + 1e-9)));
  grid.ny = std::max(1, static_cast<int>(std::floor(extent_y / grid_step + 1e-9)));
  const double off_x = 0.5 * (extent_x - grid.nx * grid_step);
  const double off_y = 0.5 * (extent_y - grid.ny * grid_step);
  grid.first_center = {x_min + off_x + 0.5 * grid_step, y_min + off_y + 0.5 * grid_step};
  return grid;
}

DescriptorDatabase build_database(const FloorPlanRaster& raster, const BuildOptions& options,
                                  const RaycastConfig& cfg, RaycastStats* stats) {
  cfg.validate();
  DescriptorDatabase db;
  db.config = cfg;
  db.grid = make_grid(raster, options.grid_step, options.yaw_anchor);
  const FreeSpacePredicate free_space = options.free_space ? options.free_space : clearance_predicate(0.3);

  const size_t n_cells = static_cast<size_t>(db.grid.nx) * db.grid.ny;
  std::vector<std::optional<DatabaseEntry>> slots(n_cells);
  const int n_threads = std::max(1, options.num_threads);
  std::vector<RaycastStats> thread_stats(n_threads);

  auto work = [&](int t) {
    for (size_t cell = t; cell < n_cells; cell += n_threads) {
      const int ix = static_cast<int>(cell % db.grid.nx);
      const int iy = static_cast<int>(cell / db.grid.nx);
      const Eigen::Vector2d c = db.grid.center(ix, iy);
      if (!free_space(raster, c)) continue;
      DatabaseEntry entry;
      entry.position = c;
      entry.descriptor = compute_descriptor(raster, Pose2D(c.x(), c.y(), db.grid.yaw_anchor), cfg, &thread_stats[t]);
      slots[cell] = std::move(entry);
    }
  };

  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> workers;
    for (int t = 0; t < n_threads; ++t) workers.emplace_back(work, t);
  }

  for (auto& slot : slots) {
    if (slot) db.entries.push_back(std::move(*slot));
  }
  if (stats) {
    for (const auto& s : thread_stats) {
      stats->rays += s.rays;
      stats->probes += s.probes;
    }
  }
  if (db.entries.empty()) throw EmptyResultError("descriptor database is empty: no grid cell passes the free-space predicate");
  return db;
}

}  // namespace compass
