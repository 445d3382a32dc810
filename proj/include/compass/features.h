#ifndef COMPASS_FEATURES_H_
#define COMPASS_FEATURES_H_

#include <algorithm>
#include <cmath>

namespace compass {

// Image line segment, pixel coordinates (integer values at pixel centers).
struct LineSegment {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double length() const { return std::hypot(x2 - x1, y2 - y1); }
  // In [0, pi/2]; 0 horizontal, pi/2 vertical.
  double angle_from_horizontal() const { return std::atan2(std::abs(y2 - y1), std::abs(x2 - x1)); }
  double mid_x() const { return 0.5 * (x1 + x2); }
  double mid_y() const { return 0.5 * (y1 + y2); }
  double y_min() const { return std::min(y1, y2); }
  double y_max() const { return std::max(y1, y2); }
};

// Axis-aligned box: top-left (x, y), width, height, in pixels.
struct Box {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

  double area() const { return w * h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
};

inline double intersection_over_union(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct WindowDetection {
  Box box;
  double brightness_score = 0.0;  // interior mean intensity
  double contrast_score = 0.0;    // interior mean minus flanking wall mean
  double texture_score = 0.0;     // interior intensity standard deviation
  int camera_id = 0;
};

}  // namespace compass

#endif  // COMPASS_FEATURES_H_
