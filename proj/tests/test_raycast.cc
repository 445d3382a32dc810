#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "compass/raycast.h"
#include "test_util.h"

namespace compass {
namespace {

using testing::square_room;

TEST(RaycastConfig, Validation) {
  RaycastConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.num_samples(), 1499);
  cfg.n_bins = 7;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = RaycastConfig{};
  cfg.step = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = RaycastConfig{};
  cfg.r_max = 0.01;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = RaycastConfig{};
  cfg.var_halfwidth = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(CastRay, SquareRoomCardinalRanges) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  const RaycastConfig cfg;
  for (int k = 0; k < 4; ++k) {
    const RayHit hit = cast_ray(room, {5.0, 5.0}, k * kPi / 2, cfg);
    EXPECT_NEAR(hit.range, 5.0, cfg.step) << "bearing index " << k;
    EXPECT_EQ(hit.hit_type, HitType::kWall);
  }
}

TEST(CastRay, DiagonalRangeMatchesGeometry) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  const RaycastConfig cfg;
  // Inner wall faces at 0.015 and 9.985; from (3, 5) toward +x+y at 45 deg the
  // ray meets the top face first.
  const double expected = (9.985 - 5.0) * std::sqrt(2.0);
  const RayHit hit = cast_ray(room, {3.0, 5.0}, kPi / 4, cfg);
  EXPECT_NEAR(hit.range, expected, 2 * cfg.step);
}

TEST(CastRay, EmptyRasterReturnsOpenAtMaxRange) {
  const FloorPlanRaster empty(100, 100, 0.05, {0, 5});
  RaycastConfig cfg;
  RaycastStats stats;
  const RayHit hit = cast_ray(empty, {2.5, 2.5}, 1.0, cfg, &stats);
  EXPECT_EQ(hit.range, cfg.r_max);
  EXPECT_EQ(hit.hit_type, HitType::kOpen);
  EXPECT_EQ(stats.rays, 1u);
  EXPECT_EQ(stats.probes, static_cast<uint64_t>(cfg.num_samples()));
}

TEST(CastRay, WindowBeforeWall) {
  FloorPlanRaster room = square_room(10.0, 0.01);
  for (int row = 400; row <= 600; ++row) {
    room.set_window(999, row, true);
    room.set_window(1000, row, true);
  }
  const RayHit hit = cast_ray(room, {5.0, 5.0}, 0.0, RaycastConfig{});
  EXPECT_EQ(hit.hit_type, HitType::kWindow);
  EXPECT_NEAR(hit.range, 5.0, 0.02);
}

TEST(CastRay, OriginInsideStructure) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  const RaycastConfig cfg;
  const RayHit hit = cast_ray(room, {0.0, 5.0}, 0.0, cfg);
  EXPECT_EQ(hit.range, cfg.step);
  EXPECT_EQ(hit.hit_type, HitType::kWall);
}

TEST(Descriptor, ChannelEncoding) {
  const RaycastConfig cfg;
  std::vector<RayHit> hits(cfg.n_bins, RayHit{4.0, HitType::kWall});
  hits[10] = {8.0, HitType::kWindow};
  hits[20] = {cfg.r_max, HitType::kOpen};
  const RadialDescriptor d = encode_descriptor(hits, cfg);
  EXPECT_DOUBLE_EQ(d.channels(kRangeChannel, 0), 4.0 / 30.0);
  EXPECT_DOUBLE_EQ(d.channels(kHitTypeChannel, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.channels(kHitTypeChannel, 10), 0.5);
  EXPECT_DOUBLE_EQ(d.channels(kHitTypeChannel, 20), 0.0);
  EXPECT_DOUBLE_EQ(d.channels(kInverseRangeChannel, 0), 1.0 / 5.0);
  // Central difference around bin 10: |4 - 4| = 0; at bin 9: |8 - 4| / 2 / 5.
  EXPECT_DOUBLE_EQ(d.channels(kGradientChannel, 10), 0.0);
  EXPECT_DOUBLE_EQ(d.channels(kGradientChannel, 9), 0.4);
  // Bin 19 and 21 neighbor a 26 m jump: clipped to 1.
  EXPECT_DOUBLE_EQ(d.channels(kGradientChannel, 19), 1.0);
  EXPECT_DOUBLE_EQ(d.channels(kVarianceChannel, 100), 0.0);
  // Window of 11 ranges around bin 10: ten 4s and one 8.
  const double mean = (10 * 4.0 + 8.0) / 11.0;
  const double var = (10 * (4.0 - mean) * (4.0 - mean) + (8.0 - mean) * (8.0 - mean)) / 11.0;
  EXPECT_NEAR(d.channels(kVarianceChannel, 10), std::sqrt(var) / 10.0, 1e-12);
  EXPECT_EQ(d.transition_count, 4);
  for (int c = 0; c < kNumChannels; ++c) {
    EXPECT_GE(d.channels.row(c).minCoeff(), 0.0);
    EXPECT_LE(d.channels.row(c).maxCoeff(), 1.0);
  }
}

TEST(Descriptor, CyclicShiftDefinition) {
  RadialDescriptor d(8);
  for (int j = 0; j < 8; ++j) d.channels(0, j) = j;
  const RadialDescriptor s = cyclic_shift(d, 3);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(s.channels(0, j), (j + 3) % 8);
  const RadialDescriptor back = cyclic_shift(s, -3);
  EXPECT_EQ(back.channels, d.channels);
}

TEST(Descriptor, RotationEquivarianceIsExact) {
  FloorPlanRaster room = square_room(10.0, 0.01);
  for (int col = 300; col < 500; ++col) {
    room.set_window(col, 0, true);
    room.set_window(col, 1, true);
  }
  for (int row = 300; row < 700; ++row) {
    room.set_wall(400, row, true);
    room.set_wall(401, row, true);
  }
  const RaycastConfig cfg;
  const Pose2D base(6.3, 4.1, 0.37);
  const RadialDescriptor d0 = compute_descriptor(room, base, cfg);
  for (int k : {1, 17, 90, 179, 359}) {
    const Pose2D turned(base.x, base.y, base.yaw + kTwoPi * k / cfg.n_bins);
    const RadialDescriptor dk = compute_descriptor(room, turned, cfg);
    EXPECT_EQ(dk.channels, cyclic_shift(d0, k).channels) << "k=" << k;
    EXPECT_EQ(dk.transition_count, d0.transition_count);
  }
}

TEST(Descriptor, TransitionSignatureIsShiftInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> label(0, 2);
  for (int t = 0; t < 50; ++t) {
    std::vector<HitType> labels(64);
    for (auto& l : labels) l = static_cast<HitType>(label(rng));
    const int sig = transition_signature(labels);
    std::rotate(labels.begin(), labels.begin() + 13, labels.end());
    EXPECT_EQ(transition_signature(labels), sig);
  }
  EXPECT_EQ(transition_signature({HitType::kOpen, HitType::kWall, HitType::kWindow}), 3);
}

TEST(Descriptor, TwoLabelSignatureIsEven) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int t = 0; t < 50; ++t) {
    std::vector<HitType> labels(90);
    for (auto& l : labels) l = coin(rng) ? HitType::kWindow : HitType::kWall;
    EXPECT_EQ(transition_signature(labels) % 2, 0);
  }
}

TEST(Grid, CenteredOnExtent) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  const GridSpec g = make_grid(room, 1.0);
  EXPECT_EQ(g.nx, 10);
  EXPECT_EQ(g.ny, 10);
  EXPECT_NEAR(g.center(0, 0).x(), 0.5, 1e-12);
  EXPECT_NEAR(g.center(9, 9).y(), 9.5, 1e-12);
  EXPECT_THROW(make_grid(room, 0.0), std::invalid_argument);
  const GridSpec tiny = make_grid(room, 50.0);
  EXPECT_EQ(tiny.nx, 1);
  EXPECT_EQ(tiny.ny, 1);
}

// Oracle: distance to the nearest wall pixel center of the room, computed
// from the room geometry instead of the raster.
double room_clearance(const Eigen::Vector2d& p, double size, double res, int thickness) {
  const double inner_lo = (thickness - 1) * res;
  const double inner_hi = size - (thickness - 1) * res;
  return std::min({p.x() - inner_lo, inner_hi - p.x(), p.y() - inner_lo, inner_hi - p.y()});
}

TEST(Database, FreeCellCountMatchesOracle) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  RaycastConfig cfg;
  cfg.n_bins = 36;
  for (double clearance : {0.3, 0.55}) {
    for (double step : {1.0, 0.7}) {
      BuildOptions opt;
      opt.grid_step = step;
      opt.free_space = clearance_predicate(clearance);
      const DescriptorDatabase db = build_database(room, opt, cfg);
      size_t expected = 0;
      for (int iy = 0; iy < db.grid.ny; ++iy) {
        for (int ix = 0; ix < db.grid.nx; ++ix) {
          if (room_clearance(db.grid.center(ix, iy), 10.0, 0.01, 2) >= clearance) ++expected;
        }
      }
      EXPECT_EQ(db.size(), expected) << "clearance " << clearance << " step " << step;
    }
  }
}

TEST(Database, EntriesOrderedByCellIndex) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  RaycastConfig cfg;
  cfg.n_bins = 36;
  BuildOptions opt;
  opt.grid_step = 1.0;
  opt.free_space = clearance_predicate(0.55);
  const DescriptorDatabase db = build_database(room, opt, cfg);
  ASSERT_EQ(db.size(), 64u);
  EXPECT_NEAR(db.entries.front().position.x(), 1.5, 1e-12);
  EXPECT_NEAR(db.entries.front().position.y(), 1.5, 1e-12);
  EXPECT_NEAR(db.entries[1].position.x(), 2.5, 1e-12);
  EXPECT_NEAR(db.entries[8].position.y(), 2.5, 1e-12);
}

TEST(Database, ThreadedBuildIsIdentical) {
  const FloorPlanRaster room = square_room(10.0, 0.02);
  RaycastConfig cfg;
  cfg.n_bins = 90;
  BuildOptions opt;
  opt.grid_step = 1.0;
  RaycastStats s1, s4;
  const DescriptorDatabase a = build_database(room, opt, cfg, &s1);
  opt.num_threads = 4;
  const DescriptorDatabase b = build_database(room, opt, cfg, &s4);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.entries[i].position, b.entries[i].position);
    EXPECT_EQ(a.entries[i].descriptor.channels, b.entries[i].descriptor.channels);
  }
  EXPECT_EQ(s1.rays, s4.rays);
  EXPECT_EQ(s1.probes, s4.probes);
}

TEST(Database, NoFreeCellThrows) {
  const FloorPlanRaster room = square_room(10.0, 0.01);
  BuildOptions opt;
  opt.free_space = [](const FloorPlanRaster&, const Eigen::Vector2d&) { return false; };
  EXPECT_THROW(build_database(room, opt, RaycastConfig{}), EmptyResultError);
}

}  // namespace
}  // namespace compass
