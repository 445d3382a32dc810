#ifndef COMPASS_SYNTH_H_
#define COMPASS_SYNTH_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "compass/descriptor.h"
#include "compass/floorplan.h"
#include "compass/matching.h"
#include "compass/raycast.h"

namespace compass {

struct WindowRules {
  double facade_fraction = 0.3;  // window length / facade length
  double min_width = 1.0;        // meters
  double max_width = 2.5;        // meters
  double corner_clearance = 0.5; // meters kept wall-only at each facade end
};

struct DoorwayRules {
  double width = 1.0;            // meters
  double end_clearance = 0.5;    // meters between a doorway and a wall end
};

/**
 * Rectangular building of width x height meters. The raster covers exactly
 * the building; world (0, 0) is its lower-left corner, so the raster origin
 * (center of pixel (0, 0)) is (resolution / 2, height - resolution / 2).
 * Rooms come from recursive splits of the interior, each split wall carrying
 * one doorway.
 */
struct SynthPlanSpec {
  double width = 20.0;
  double height = 15.0;
  double resolution = 0.05;
  double wall_thickness = 0.2;
  int partition_depth = 2;
  double min_room_size = 4.0;  // rooms narrower than 2x this are not split
  WindowRules windows;
  DoorwayRules doorways;

  void validate() const;
};

// Deterministic for a fixed (spec, seed). Window pixels keep their wall bit.
// Throws std::invalid_argument for an infeasible spec.
FloorPlanRaster generate_plan(const SynthPlanSpec& spec, uint64_t seed);

struct ObservationNoise {
  double dropout = 0.0;          // probability a whole window span is missed
  double spurious_rate = 0.0;    // expected spurious spans per observation (Poisson)
  int spurious_min_bins = 5;
  int spurious_max_bins = 20;
  double jitter_deg = 0.0;       // per-span bearing offset, Gaussian std
  int dilation_bins = 0;         // added to each span end; negative erodes

  void validate() const;
};

enum class ObservationMode {
  kHitTypeOnly,  // visual contract: range channels zero and inactive
  kAllChannels,  // keeps the ray-cast range channels; noise touches only hit type
};

/**
 * Simulated visual descriptor at `pose`. Window runs of the ray-cast
 * hit-type row become azimuth spans, go through dropout, jitter, dilation
 * and spurious insertion, and are rasterized back onto a wall-default row
 * (open bins read as wall). Throws std::invalid_argument when the pose lies
 * in a structure pixel.
 */
RadialDescriptor simulate_observation(const FloorPlanRaster& raster, const Pose2D& pose, const RaycastConfig& cfg,
                                      const ObservationNoise& noise, uint64_t seed,
                                      ObservationMode mode = ObservationMode::kHitTypeOnly);

// Lexicographically least rotation of the label sequence, open mapped to
// wall. Equal keys mean rows identical up to a cyclic shift.
std::vector<uint8_t> canonical_rotation_key(const RadialDescriptor& d);

// For each entry, whether no other entry shares its canonical key.
std::vector<bool> unique_hit_type_entries(const DescriptorDatabase& db);

enum class YawSampling {
  kBinned,      // yaw_anchor + 2*pi*k/N, k uniform
  kContinuous,  // uniform in [0, 2*pi)
};

struct EvalConfig {
  int trials = 200;
  ObservationNoise noise;
  ObservationMode mode = ObservationMode::kHitTypeOnly;
  MatchConfig match;
  uint64_t seed = 0;
  YawSampling yaw_sampling = YawSampling::kBinned;
  bool unique_only = false;  // sample only entries with a unique hit-type row
  int num_threads = 1;
};

struct TrialRecord {
  int trial = 0;
  size_t true_index = 0;
  Pose2D true_pose;
  Pose2D estimated_pose;
  int rank = 0;                   // 1-based; candidates + 1 when filtered out
  double yaw_error_deg = 0.0;     // top-1 estimate
  double position_error_m = 0.0;  // top-1 estimate
  double true_cell_yaw_error_deg = 0.0;  // best shift at the true cell
  double score = 0.0;
  bool unique = false;
};

struct EvalSummary {
  int trials = 0;
  int unique_trials = 0;
  double rank1_rate = 0.0;
  double yaw_success_rate = 0.0;       // top-1 yaw error < 0.5 deg
  double position_success_rate = 0.0;  // top-1 position error <= grid step / 2
  double true_cell_yaw_rate_2deg = 0.0;
  double median_yaw_error_deg = 0.0;
  double median_position_error_m = 0.0;
  double median_true_cell_yaw_error_deg = 0.0;
};

struct EvalReport {
  std::vector<TrialRecord> records;
  EvalSummary summary;
};

/**
 * Samples grid poses from the database, simulates observations and ranks the
 * full database for each. Trial i draws from a generator seeded with
 * split_seed(seed, i), so results do not depend on num_threads. Throws
 * EmptyResultError for an empty database (or no unique entry when
 * unique_only is set).
 */
EvalReport run_localization_eval(const FloorPlanRaster& raster, const DescriptorDatabase& db,
                                 const EvalConfig& cfg);

EvalSummary summarize(const std::vector<TrialRecord>& records, double grid_step);

void write_eval_csv(std::ostream& out, const EvalReport& report, const std::string& header);
void write_eval_summary(std::ostream& out, const EvalSummary& summary);

}  // namespace compass

#endif  // COMPASS_SYNTH_H_
