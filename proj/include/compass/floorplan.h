#ifndef COMPASS_FLOORPLAN_H_
#define COMPASS_FLOORPLAN_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "compass/common.h"
#include "compass/image.h"

namespace compass {

// Structural class of one raster pixel.
enum class Cell : uint8_t { kOpen = 0, kWall = 1, kWindow = 2 };

// Planar pose: position in meters, heading in radians normalized to [0, 2*pi).
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2D() = default;
  Pose2D(double x_in, double y_in, double yaw_in) : x(x_in), y(y_in), yaw(normalize_angle(yaw_in)) {}

  Eigen::Vector2d position() const { return {x, y}; }
};

/**
 * Floor plan as two binary masks (walls, glazing) with a metric transform.
 *
 * Pixel coordinates are continuous with integer values at pixel centers:
 * pixel (col, row) covers [col - 0.5, col + 0.5) x [row - 0.5, row + 0.5).
 * The world point `origin` is the center of pixel (0, 0). World +x maps to
 * increasing column, world +y maps to decreasing row (image rows grow
 * downward), so
 *
 *   col = (x - origin.x) / resolution
 *   row = (origin.y - y) / resolution
 *
 * A pixel may be set in both masks; classify() gives the window precedence.
 * Queries outside the raster classify as kOpen.
 */
class FloorPlanRaster {
 public:
  FloorPlanRaster() = default;
  FloorPlanRaster(int width, int height, double resolution, Eigen::Vector2d origin);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
  bool wall(int col, int row) const { return wall_[index(col, row)] != 0; }
  bool window(int col, int row) const { return window_[index(col, row)] != 0; }
  void set_wall(int col, int row, bool value);
  void set_window(int col, int row, bool value);

  Cell classify(int col, int row) const {
    return in_bounds(col, row) ? static_cast<Cell>(cells_[index(col, row)]) : Cell::kOpen;
  }
  Cell classify_world(const Eigen::Vector2d& p) const;

  Eigen::Vector2d world_to_pixel(const Eigen::Vector2d& p) const {
    return {(p.x() - origin_.x()) / resolution_, (origin_.y() - p.y()) / resolution_};
  }
  Eigen::Vector2d pixel_to_world(const Eigen::Vector2d& px) const {
    return {origin_.x() + px.x() * resolution_, origin_.y() - px.y() * resolution_};
  }

  // Pixel containing a world point (may be out of bounds).
  Eigen::Vector2i pixel_of(const Eigen::Vector2d& p) const;

  // Row-major classification grid (Cell values), window over wall.
  const std::vector<uint8_t>& cells() const { return cells_; }
  const std::vector<uint8_t>& wall_mask() const { return wall_; }
  const std::vector<uint8_t>& window_mask() const { return window_; }

  size_t count_walls() const;
  size_t count_windows() const;

 private:
  size_t index(int col, int row) const { return static_cast<size_t>(row) * width_ + col; }
  void refresh(size_t i);

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  std::vector<uint8_t> wall_;
  std::vector<uint8_t> window_;
  std::vector<uint8_t> cells_;
};

using ColorPredicate = std::function<bool(uint8_t r, uint8_t g, uint8_t b)>;

// Red-dominant glazing: R > 150, R > 1.5 G, R > 1.5 B.
bool default_window_rule(uint8_t r, uint8_t g, uint8_t b);
// Dark pixels (luma < 100) that are not glazing.
bool default_wall_rule(uint8_t r, uint8_t g, uint8_t b);

struct PlanMetadata {
  double resolution = 0.01;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
};

FloorPlanRaster raster_from_image(const RgbImage& image, const PlanMetadata& meta,
                                  const ColorPredicate& wall_rule = default_wall_rule,
                                  const ColorPredicate& window_rule = default_window_rule);

FloorPlanRaster load_floorplan(const std::string& image_path, const PlanMetadata& meta,
                               const ColorPredicate& wall_rule = default_wall_rule,
                               const ColorPredicate& window_rule = default_window_rule);

// Sidecar next to a plan image: "plan.png" -> "plan.json".
std::string default_metadata_path(const std::string& image_path);
PlanMetadata read_plan_metadata(const std::string& path);
void write_plan_metadata(const std::string& path, const PlanMetadata& meta);

// Renders walls black and glazing pure red on white.
RgbImage render_floorplan(const FloorPlanRaster& raster);
void save_floorplan(const FloorPlanRaster& raster, const std::string& image_path,
                    const std::string& metadata_path);

}  // namespace compass

#endif  // COMPASS_FLOORPLAN_H_
