#ifndef COMPASS_RAYCAST_H_
#define COMPASS_RAYCAST_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "compass/descriptor.h"
#include "compass/floorplan.h"

namespace compass {

struct RaycastConfig {
  int n_bins = 360;
  double r_max = 30.0;        // meters
  double step = 0.02;         // marching step, meters
  double r_clip = 5.0;        // gradient clip, meters per bin
  double sigma_clip = 10.0;   // local standard deviation clip, meters
  int var_halfwidth = 5;      // bins

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  // Number of samples strictly inside r_max: step, 2*step, ...
  int num_samples() const;
};

struct RayHit {
  double range = 0.0;  // meters, in (0, r_max]
  HitType hit_type = HitType::kOpen;
};

// Counts raster lookups made by the marcher.
struct RaycastStats {
  uint64_t rays = 0;
  uint64_t probes = 0;
};

/**
 * Marches one ray at fixed step until a window pixel, a wall pixel or r_max.
 *
 * Samples sit at i * step for i >= 1 and strictly below r_max; the window mask
 * is checked before the wall mask. A ray that meets nothing returns
 * (r_max, kOpen). If the origin pixel itself is structure the ray returns
 * (step, class of that pixel).
 *
 * Fixed-step marching can skip a structure line thinner than the step when
 * crossing it diagonally (step 0.02 m over 0.01 m pixels visits every other
 * pixel); plans should draw walls at least step / resolution pixels thick.
 */
RayHit cast_ray(const FloorPlanRaster& raster, const Eigen::Vector2d& origin, double bearing,
                const RaycastConfig& cfg, RaycastStats* stats = nullptr);

// Absolute bearing of descriptor column j for a given heading. The heading
// is quantized to 2^-20 of a bin so that headings differing by whole bins
// produce bit-identical bearing sets.
double ray_bearing(double heading, int j, int n_bins);

std::vector<RayHit> cast_rays(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                              RaycastStats* stats = nullptr);

// Encodes ray results into the five channels:
//   0: r / r_max
//   1: hit type (wall 1.0, window 0.5, open 0.0)
//   2: min(|r[j+1] - r[j-1]| / 2 / r_clip, 1), circular central difference
//   3: 1 / (1 + r)
//   4: min(std(r over j-w..j+w) / sigma_clip, 1), population std, circular
RadialDescriptor encode_descriptor(const std::vector<RayHit>& hits, const RaycastConfig& cfg);

RadialDescriptor compute_descriptor(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                                    RaycastStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Descriptor database over a regular grid of candidate positions.

using FreeSpacePredicate = std::function<bool(const FloorPlanRaster&, const Eigen::Vector2d&)>;

// Default predicate: the point's pixel is open and no structure pixel center
// lies closer than `min_clearance` meters.
FreeSpacePredicate clearance_predicate(double min_clearance = 0.3);

// Distance from p to the nearest structure pixel center, searching out to
// `max_distance`; returns +inf when none is that close.
double distance_to_structure(const FloorPlanRaster& raster, const Eigen::Vector2d& p, double max_distance);

struct GridSpec {
  double step = 1.0;
  double yaw_anchor = 0.0;
  int nx = 0;
  int ny = 0;
  Eigen::Vector2d first_center = Eigen::Vector2d::Zero();  // center of cell (0, 0)

  // Cell (ix, iy) center; ix grows with world x, iy with world y.
  Eigen::Vector2d center(int ix, int iy) const {
    return first_center + Eigen::Vector2d(ix * step, iy * step);
  }
};

// Grid covering the raster extent, centered on it; at least one cell per axis.
GridSpec make_grid(const FloorPlanRaster& raster, double grid_step, double yaw_anchor = 0.0);

struct DatabaseEntry {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  RadialDescriptor descriptor;
};

struct DescriptorDatabase {
  RaycastConfig config;
  GridSpec grid;
  ChannelMask active = kAllChannels;
  std::vector<DatabaseEntry> entries;

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct BuildOptions {
  double grid_step = 0.5;
  double yaw_anchor = 0.0;
  FreeSpacePredicate free_space;  // empty -> clearance_predicate(0.3)
  int num_threads = 1;
};

// Descriptors at the yaw anchor for every free grid cell, ordered by cell
// index (iy * nx + ix). Throws EmptyResultError if no cell is free.
DescriptorDatabase build_database(const FloorPlanRaster& raster, const BuildOptions& options,
                                  const RaycastConfig& cfg, RaycastStats* stats = nullptr);

}  // namespace compass

#endif  // COMPASS_RAYCAST_H_
