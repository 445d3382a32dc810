#include "compass/csv_io.h"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "compass/common.h"

namespace compass {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

// Data rows of a CSV file, after the header row, split into fields.
std::vector<std::vector<std::string>> read_rows(const std::string& path, const std::string& first_column,
                                                size_t min_fields) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (!header_seen) {
      if (fields.empty() || fields[0] != first_column) {
        throw IoError(path + ":" + std::to_string(line_no) + ": expected header starting with '" + first_column + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < min_fields) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(min_fields) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!header_seen) throw IoError("'" + path + "' has no header row");
  return rows;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("'" + path + "': malformed number '" + s + "'");
  }
}

// Seventeen significant digits; reads back to the same double.
std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_segments_csv(std::ostream& out, const std::vector<LineSegment>& segments, const std::string& header) {
  out << header << "x1,y1,x2,y2\n";
  for (const auto& s : segments) {
    out << exact(s.x1) << ',' << exact(s.y1) << ',' << exact(s.x2) << ',' << exact(s.y2) << '\n';
  }
}

std::vector<LineSegment> read_segments_csv(const std::string& path) {
  std::vector<LineSegment> out;
  for (const auto& f : read_rows(path, "x1", 4)) {
    out.push_back({to_double(f[0], path), to_double(f[1], path), to_double(f[2], path), to_double(f[3], path)});
  }
  return out;
}

void write_detections_csv(std::ostream& out, const std::vector<WindowDetection>& detections,
                          const std::string& header) {
  out << header << "camera_id,b_x,b_y,b_w,b_h,score,contrast_score,texture_score\n";
  for (const auto& d : detections) {
    out << d.camera_id << ',' << exact(d.box.x) << ',' << exact(d.box.y) << ',' << exact(d.box.w) << ','
        << exact(d.box.h) << ',' << exact(d.brightness_score) << ',' << exact(d.contrast_score) << ','
        << exact(d.texture_score) << '\n';
  }
}

std::vector<WindowDetection> read_detections_csv(const std::string& path) {
  std::vector<WindowDetection> out;
  for (const auto& f : read_rows(path, "camera_id", 6)) {
    WindowDetection d;
    d.camera_id = static_cast<int>(to_double(f[0], path));
    d.box = {to_double(f[1], path), to_double(f[2], path), to_double(f[3], path), to_double(f[4], path)};
    d.brightness_score = to_double(f[5], path);
    if (f.size() > 6) d.contrast_score = to_double(f[6], path);
    if (f.size() > 7) d.texture_score = to_double(f[7], path);
    out.push_back(d);
  }
  return out;
}

}  // namespace compass
