#ifndef COMPASS_WINDOW_DETECTION_H_
#define COMPASS_WINDOW_DETECTION_H_

#include <span>
#include <vector>

#include "compass/common.h"
#include "compass/features.h"
#include "compass/fisheye.h"
#include "compass/image.h"

namespace compass {

// ---------------------------------------------------------------------------
// Step 1: line segments (simplified edge drawing).

struct SegmentDetectorConfig {
  double min_length = 15.0;          // pixels
  double gradient_threshold = 40.0;  // |gx| + |gy| of the Sobel response after 5x5 smoothing
  double anchor_threshold = 16.0;    // extra magnitude an anchor needs above gradient_threshold
  int scan_interval = 1;             // anchor scan stride, rows and columns
  double max_deviation = 1.5;        // pixels; a chain is split where the fit deviates more
};

/**
 * Gradient anchors are traced along the edge direction into pixel chains,
 * and each chain is cut into least-squares line segments. Deterministic.
 */
std::vector<LineSegment> detect_segments(const GrayImage& image, const SegmentDetectorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Step 2: window band.

struct WindowBand {
  int y_top = 0;
  int y_bot = 0;
};

struct BandConfig {
  double brightness_percentile = 0.85;
  int smoothing_rows = 31;
  double threshold_ratio = 0.5;    // of the peak combined score
  int min_run = 20;                // rows; shorter runs trigger the fallback
  double fallback_margin = 0.2;    // fallback keeps the middle 1 - 2 * margin of the rows
  double vertical_angle = deg_to_rad(30.0);
};

/**
 * Row score = 0.5 * brightness density + 0.5 * vertical-segment midpoint
 * density, each moving-averaged over `smoothing_rows` and normalized to a
 * peak of 1. A pixel is bright when it is at or above the brightness
 * percentile and strictly above the image mean. The band is the longest run
 * of rows scoring above threshold_ratio * peak; if that run is not longer
 * than min_run rows, the middle 60% of the image is returned.
 */
WindowBand estimate_window_band(const GrayImage& image, std::span<const LineSegment> segments,
                                const BandConfig& cfg = {});

// ---------------------------------------------------------------------------
// Step 3: vertical edge clusters.

struct EdgeCluster {
  std::vector<int> members;  // segment indices
  double x = 0.0;            // mean member midpoint x
  double y_min = 0.0;
  double y_max = 0.0;
};

struct ClusterConfig {
  double min_angle = deg_to_rad(30.0);  // from horizontal, exclusive
  double min_length = 20.0;             // pixels
  double gap = 8.0;                     // pixels
};

/**
 * Keeps segments with midpoint inside the band, steeper than min_angle and
 * at least min_length long, then clusters them greedily in ascending x: a
 * segment joins the nearest cluster within `gap` horizontally whose vertical
 * extent overlaps its own by at least one pixel.
 */
std::vector<EdgeCluster> cluster_vertical_edges(std::span<const LineSegment> segments, const WindowBand& band,
                                                const ClusterConfig& cfg = {});

// ---------------------------------------------------------------------------
// Steps 4-5: pairing, verification, suppression.

struct PairingRules {
  double min_separation = 20.0;
  double max_separation = 400.0;
  // Overlap length over the longer of the two cluster extents.
  double min_overlap_ratio = 0.4;
  // Reject a pair when another cluster between them overlaps the pair's rows
  // by at least min_overlap_ratio; such a box straddles a wall section.
  bool reject_straddling = true;
};

struct VerifyThresholds {
  double contrast_margin = 20.0;  // interior mean over wall-strip mean
  double texture_floor = 8.0;     // interior standard deviation
  double bright_sky = 200.0;      // interior mean that passes without texture
  int edge_margin = 2;            // pixels excluded next to each box edge
  int wall_strip = 10;            // width of each flanking wall strip
};

struct RegionScores {
  double interior_mean = 0.0;
  double interior_std = 0.0;
  double wall_mean = 0.0;
  bool valid = false;  // interior and at least one wall strip are non-empty
};

RegionScores measure_box(const GrayImage& image, const Box& box, const VerifyThresholds& thr);
bool passes_verification(const RegionScores& scores, const VerifyThresholds& thr);

std::vector<WindowDetection> pair_and_verify(std::span<const EdgeCluster> clusters, const GrayImage& image,
                                             const PairingRules& rules = {}, const VerifyThresholds& thr = {});

struct SuppressionConfig {
  double iou_threshold = 0.4;
  double periphery_factor = 0.92;  // of the FoV circle radius
  double red_ratio = 1.4;
};

/**
 * Greedy non-maximum suppression by descending brightness score, then the
 * periphery filter (needs a camera) and the red-dominance filter (needs a
 * color image). Either context may be null.
 */
std::vector<WindowDetection> suppress_and_filter(std::vector<WindowDetection> dets, const SuppressionConfig& cfg = {},
                                                 const CameraModel* camera = nullptr, const RgbImage* color = nullptr);

// ---------------------------------------------------------------------------
// Full pipeline.

struct WindowDetectorConfig {
  SegmentDetectorConfig segments;
  BandConfig band;
  ClusterConfig clusters;
  PairingRules pairing;
  VerifyThresholds verify;
  SuppressionConfig suppression;
};

struct WindowDetectionResult {
  std::vector<LineSegment> segments;
  WindowBand band;
  std::vector<EdgeCluster> clusters;
  std::vector<WindowDetection> detections;
  std::vector<int> window_segments;  // indices of segments bordering a detection
};

// Runs every stage on `image`; `segments`, when given, replaces step 1.
WindowDetectionResult detect_windows(const GrayImage& image, const WindowDetectorConfig& cfg = {},
                                     const CameraModel* camera = nullptr, const RgbImage* color = nullptr,
                                     const std::vector<LineSegment>* segments = nullptr, int camera_id = 0);

}  // namespace compass

#endif  // COMPASS_WINDOW_DETECTION_H_
