#ifndef COMPASS_SYNTH_IMAGES_H_
#define COMPASS_SYNTH_IMAGES_H_

#include <cstdint>
#include <vector>

#include "compass/features.h"
#include "compass/fisheye.h"
#include "compass/image.h"

namespace compass {

// Synthetic facade image: bright textured rectangles on a textured dark wall
// within a shared row band, plus distractors (dark pipes, a dark door, a
// ceiling beam, diagonal cables and a red panel).
struct WindowSceneSpec {
  int width = 640;
  int height = 480;
  int min_windows = 2;
  int max_windows = 5;
  int min_window_width = 40;
  int max_window_width = 110;
  int min_window_height = 90;
  int max_window_height = 170;
  int min_gap = 45;  // pixels between a window and any other object
  double wall_mean = 70.0;
  double wall_noise = 6.0;
  double window_min_mean = 150.0;
  double window_max_mean = 235.0;
  double window_noise = 10.0;
  int distractors = 4;
};

struct WindowScene {
  GrayImage gray;
  RgbImage color;
  std::vector<Box> windows;  // ground truth
};

WindowScene generate_window_scene(const WindowSceneSpec& spec, uint64_t seed);

struct DetectionScore {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double precision() const;
  double recall() const;
};

// Greedy one-to-one matching in descending IoU; pairs at or above
// `iou_threshold` count as true positives.
DetectionScore score_detections(const std::vector<Box>& truth, const std::vector<WindowDetection>& detections,
                                double iou_threshold = 0.5);

// Line segments imaged by a tilted fisheye camera in a box-shaped scene:
// vertical edges, edges along the two horizontal axes, and random outlier
// segments.
struct LineSceneSpec {
  CameraModel camera;
  double roll = 0.0;   // radians
  double pitch = 0.0;  // radians
  int vertical_lines = 40;
  int horizontal_lines = 40;  // split evenly between the x and z axes
  double outlier_fraction = 0.2;  // of all segments
  double pixel_noise = 0.0;       // endpoint Gaussian std, pixels
  double min_pixel_length = 25.0;
};

struct LineScene {
  std::vector<LineSegment> segments;
  std::vector<int> kind;  // 0 vertical, 1 horizontal x, 2 horizontal z, 3 outlier
};

LineScene generate_line_scene(const LineSceneSpec& spec, uint64_t seed);

// A 1000x1000 equidistant camera with a 95 degree half field of view.
CameraModel default_test_camera();

}  // namespace compass

#endif  // COMPASS_SYNTH_IMAGES_H_
