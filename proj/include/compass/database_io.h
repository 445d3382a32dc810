#ifndef COMPASS_DATABASE_IO_H_
#define COMPASS_DATABASE_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "compass/raycast.h"

namespace compass {

/*
 * Descriptor database file, version 1. All fields little-endian.
 *
 *   offset  type        field
 *   0       char[8]     magic "CMPSDESC"
 *   8       u32         format version (1)
 *   12      char[32]    producing tool, NUL padded
 *   44      u32         n_bins (N_s)
 *   48      u32         n_channels (C = 5)
 *   52      u32         active channel bitmask (bit c = channel c)
 *   56      f64         r_max
 *   64      f64         step
 *   72      f64         r_clip
 *   80      f64         sigma_clip
 *   88      u32         var_halfwidth
 *   92      f64         grid step
 *   100     f64         yaw anchor (radians)
 *   108     i32         grid nx
 *   112     i32         grid ny
 *   116     f64         grid first cell center x
 *   124     f64         grid first cell center y
 *   132     u64         record count
 *   140     records...
 *
 * Each record: f64 cell x, f64 cell y (meters), u32 transition_count, then
 * C * N_s f32 values, channel-major (all bins of channel 0, then channel 1...).
 *
 * A single query descriptor uses the same layout with one record.
 */
inline constexpr char kDatabaseMagic[8] = {'C', 'M', 'P', 'S', 'D', 'E', 'S', 'C'};
inline constexpr uint32_t kDatabaseVersion = 1;

void write_database(std::ostream& out, const DescriptorDatabase& db);
void write_database(const std::string& path, const DescriptorDatabase& db);
DescriptorDatabase read_database(std::istream& in);
DescriptorDatabase read_database(const std::string& path);

// Wraps one descriptor as a one-record database.
DescriptorDatabase single_descriptor_file(const RadialDescriptor& d, const RaycastConfig& cfg,
                                          const Eigen::Vector2d& position = Eigen::Vector2d::Zero());

// Debug export; not read back.
void write_database_json(std::ostream& out, const DescriptorDatabase& db);

}  // namespace compass

#endif  // COMPASS_DATABASE_IO_H_
