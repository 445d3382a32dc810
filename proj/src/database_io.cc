#include "compass/database_io.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>

namespace compass {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) throw IoError("descriptor file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_database(std::ostream& out, const DescriptorDatabase& db) {
  const uint32_t n_bins = static_cast<uint32_t>(db.config.n_bins);
  out.write(kDatabaseMagic, sizeof(kDatabaseMagic));
  put<uint32_t>(out, kDatabaseVersion);
  char tool[32] = {};
  std::strncpy(tool, "compass " COMPASS_VERSION, sizeof(tool) - 1);
  out.write(tool, sizeof(tool));
  put<uint32_t>(out, n_bins);
  put<uint32_t>(out, kNumChannels);
  put<uint32_t>(out, static_cast<uint32_t>(db.active.to_ulong()));
  put<double>(out, db.config.r_max);
  put<double>(out, db.config.step);
  put<double>(out, db.config.r_clip);
  put<double>(out, db.config.sigma_clip);
  put<uint32_t>(out, static_cast<uint32_t>(db.config.var_halfwidth));
  put<double>(out, db.grid.step);
  put<double>(out, db.grid.yaw_anchor);
  put<int32_t>(out, db.grid.nx);
  put<int32_t>(out, db.grid.ny);
  put<double>(out, db.grid.first_center.x());
  put<double>(out, db.grid.first_center.y());
  put<uint64_t>(out, db.entries.size());
  for (const auto& e : db.entries) {
    if (e.descriptor.n_bins() != static_cast<int>(n_bins)) {
      throw std::invalid_argument("database entry bin count differs from config n_bins");
    }
    put<double>(out, e.position.x());
    put<double>(out, e.position.y());
    put<uint32_t>(out, static_cast<uint32_t>(e.descriptor.transition_count));
    for (int c = 0; c < kNumChannels; ++c) {
      for (uint32_t j = 0; j < n_bins; ++j) put<float>(out, static_cast<float>(e.descriptor.channels(c, j)));
    }
  }
  if (!out) throw IoError("failed writing descriptor database");
}

void write_database(const std::string& path, const DescriptorDatabase& db) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_database(out, db);
}

DescriptorDatabase read_database(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDatabaseMagic, sizeof(magic)) != 0) {
    throw IoError("not a descriptor file (bad magic)");
  }
  const uint32_t version = get<uint32_t>(in);
  if (version != kDatabaseVersion) throw IoError("unsupported descriptor file version " + std::to_string(version));
  char tool[32];
  if (!in.read(tool, sizeof(tool))) throw IoError("descriptor file truncated");

  DescriptorDatabase db;
  const uint32_t n_bins = get<uint32_t>(in);
  const uint32_t n_channels = get<uint32_t>(in);
  if (n_channels != kNumChannels) throw IoError("descriptor file has unsupported channel count");
  db.active = ChannelMask(get<uint32_t>(in));
  db.config.n_bins = static_cast<int>(n_bins);
  db.config.r_max = get<double>(in);
  db.config.step = get<double>(in);
  db.config.r_clip = get<double>(in);
  db.config.sigma_clip = get<double>(in);
  db.config.var_halfwidth = static_cast<int>(get<uint32_t>(in));
  db.grid.step = get<double>(in);
  db.grid.yaw_anchor = get<double>(in);
  db.grid.nx = get<int32_t>(in);
  db.grid.ny = get<int32_t>(in);
  const double fx = get<double>(in);
  const double fy = get<double>(in);
  db.grid.first_center = {fx, fy};
  const uint64_t count = get<uint64_t>(in);
  try {
    db.config.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("descriptor file carries an invalid config: ") + e.what());
  }

  db.entries.reserve(static_cast<size_t>(std::min<uint64_t>(count, 1u << 24)));
  for (uint64_t i = 0; i < count; ++i) {
    DatabaseEntry e;
    const double x = get<double>(in);
    const double y = get<double>(in);
    e.position = {x, y};
    e.descriptor = RadialDescriptor(static_cast<int>(n_bins));
    e.descriptor.transition_count = static_cast<int>(get<uint32_t>(in));
    e.descriptor.active = db.active;
    for (int c = 0; c < kNumChannels; ++c) {
      for (uint32_t j = 0; j < n_bins; ++j) e.descriptor.channels(c, j) = get<float>(in);
    }
    db.entries.push_back(std::move(e));
  }
  return db;
}

DescriptorDatabase read_database(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open descriptor file '" + path + "'");
  try {
    return read_database(in);
  } catch (const IoError& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

DescriptorDatabase single_descriptor_file(const RadialDescriptor& d, const RaycastConfig& cfg,
                                          const Eigen::Vector2d& position) {
  DescriptorDatabase db;
  db.config = cfg;
  db.config.n_bins = d.n_bins();
  db.active = d.active;
  db.grid = GridSpec{};
  db.grid.nx = 0;
  db.grid.ny = 0;
  db.entries.push_back({position, d});
  return db;
}

void write_database_json(std::ostream& out, const DescriptorDatabase& db) {
  nlohmann::json j;
  j["format"] = "compass-descriptors";
  j["version"] = kDatabaseVersion;
  j["tool"] = "compass " COMPASS_VERSION;
  j["n_bins"] = db.config.n_bins;
  j["n_channels"] = kNumChannels;
  j["active_channels"] = db.active.to_string();
  j["config"] = {{"r_max", db.config.r_max},
                 {"step", db.config.step},
                 {"r_clip", db.config.r_clip},
                 {"sigma_clip", db.config.sigma_clip},
                 {"var_halfwidth", db.config.var_halfwidth}};
  j["grid"] = {{"step", db.grid.step},
               {"yaw_anchor", db.grid.yaw_anchor},
               {"nx", db.grid.nx},
               {"ny", db.grid.ny},
               {"first_center", {db.grid.first_center.x(), db.grid.first_center.y()}}};
  auto& records = j["records"] = nlohmann::json::array();
  for (const auto& e : db.entries) {
    nlohmann::json r;
    r["x"] = e.position.x();
    r["y"] = e.position.y();
    r["transition_count"] = e.descriptor.transition_count;
    nlohmann::json rows = nlohmann::json::array();
    for (int c = 0; c < kNumChannels; ++c) {
      std::vector<double> row(e.descriptor.channels.row(c).begin(), e.descriptor.channels.row(c).end());
      rows.push_back(row);
    }
    r["channels"] = std::move(rows);
    records.push_back(std::move(r));
  }
  out << j.dump(1) << "\n";
}

}  // namespace compass
