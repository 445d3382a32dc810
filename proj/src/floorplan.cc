#include "compass/floorplan.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace compass {

FloorPlanRaster::FloorPlanRaster(int width, int height, double resolution, Eigen::Vector2d origin)
    : width_(width), height_(height), resolution_(resolution), origin_(std::move(origin)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("floor plan raster must have positive area");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("floor plan resolution must be positive");
  }
  const size_t n = static_cast<size_t>(width) * height;
  wall_.assign(n, 0);
  window_.assign(n, 0);
  cells_.assign(n, static_cast<uint8_t>(Cell::kOpen));
}

void FloorPlanRaster::set_wall(int col, int row, bool value) {
  const size_t i = index(col, row);
  wall_[i] = value ? 1 : 0;
  refresh(i);
}

void FloorPlanRaster::set_window(int col, int row, bool value) {
  const size_t i = index(col, row);
  window_[i] = value ? 1 : 0;
  refresh(i);
}

void FloorPlanRaster::refresh(size_t i) {
  Cell c = Cell::kOpen;
  if (window_[i]) {
    c = Cell::kWindow;
  } else if (wall_[i]) {
    c = Cell::kWall;
  }
  cells_[i] = static_cast<uint8_t>(c);
}

Eigen::Vector2i FloorPlanRaster::pixel_of(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d px = world_to_pixel(p);
  return {static_cast<int>(std::floor(px.x() + 0.5)), static_cast<int>(std::floor(px.y() + 0.5))};
}

Cell FloorPlanRaster::classify_world(const Eigen::Vector2d& p) const {
  const Eigen::Vector2i px = pixel_of(p);
  return classify(px.x(), px.y());
}

size_t FloorPlanRaster::count_walls() const {
  return static_cast<size_t>(std::count(wall_.begin(), wall_.end(), 1));
}

size_t FloorPlanRaster::count_windows() const {
  return static_cast<size_t>(std::count(window_.begin(), window_.end(), 1));
}

bool default_window_rule(uint8_t r, uint8_t g, uint8_t b) {
  return r > 150 && r > 1.5 * g && r > 1.5 * b;
}

bool default_wall_rule(uint8_t r, uint8_t g, uint8_t b) {
  const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
  return luma < 100.0 && !default_window_rule(r, g, b);
}

FloorPlanRaster raster_from_image(const RgbImage& image, const PlanMetadata& meta,
                                  const ColorPredicate& wall_rule, const ColorPredicate& window_rule) {
  if (image.empty()) throw IoError("floor plan image has zero area");
  FloorPlanRaster raster(image.width, image.height, meta.resolution, meta.origin);
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const uint8_t* p = image.at(col, row);
      if (window_rule(p[0], p[1], p[2])) raster.set_window(col, row, true);
      if (wall_rule(p[0], p[1], p[2])) raster.set_wall(col, row, true);
    }
  }
  return raster;
}

FloorPlanRaster load_floorplan(const std::string& image_path, const PlanMetadata& meta,
                               const ColorPredicate& wall_rule, const ColorPredicate& window_rule) {
  if (!(meta.resolution > 0.0)) throw std::invalid_argument("floor plan resolution must be positive");
  return raster_from_image(read_png_rgb(image_path), meta, wall_rule, window_rule);
}

std::string default_metadata_path(const std::string& image_path) {
  return std::filesystem::path(image_path).replace_extension(".json").string();
}

PlanMetadata read_plan_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan metadata '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed plan metadata '" + path + "': " + e.what());
  }
  PlanMetadata meta;
  try {
    meta.resolution = j.at("resolution").get<double>();
    const auto& o = j.at("origin");
    meta.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw IoError("plan metadata '" + path + "' lacks resolution/origin: " + e.what());
  }
  if (!(meta.resolution > 0.0)) throw std::invalid_argument("plan metadata '" + path + "': resolution must be positive");
  return meta;
}

void write_plan_metadata(const std::string& path, const PlanMetadata& meta) {
  nlohmann::json j;
  j["resolution"] = meta.resolution;
  j["origin"] = {meta.origin.x(), meta.origin.y()};
  j["convention"] = "origin is the world position of the center of pixel (0,0); +x -> +col, +y -> -row";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write plan metadata '" + path + "'");
  out << j.dump(2) << "\n";
}

RgbImage render_floorplan(const FloorPlanRaster& raster) {
  RgbImage image(raster.width(), raster.height(), 255);
  for (int row = 0; row < raster.height(); ++row) {
    for (int col = 0; col < raster.width(); ++col) {
      switch (raster.classify(col, row)) {
        case Cell::kWindow: image.set(col, row, 255, 0, 0); break;
        case Cell::kWall: image.set(col, row, 0, 0, 0); break;
        case Cell::kOpen: break;
      }
    }
  }
  return image;
}

void save_floorplan(const FloorPlanRaster& raster, const std::string& image_path,
                    const std::string& metadata_path) {
  write_png(image_path, render_floorplan(raster));
  write_plan_metadata(metadata_path, {raster.resolution(), raster.origin()});
}

}  // namespace compass
