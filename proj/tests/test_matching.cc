#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "compass/database_io.h"
#include "compass/matching.h"
#include "compass/raycast.h"
#include "test_util.h"

namespace compass {
namespace {

RadialDescriptor random_descriptor(std::mt19937_64& rng, int n_bins) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RadialDescriptor d(n_bins);
  for (int c = 0; c < kNumChannels; ++c) {
    for (int j = 0; j < n_bins; ++j) d.channels(c, j) = u(rng);
  }
  for (int j = 0; j < n_bins; ++j) {
    const double v = d.channels(kHitTypeChannel, j);
    d.channels(kHitTypeChannel, j) = v < 0.2 ? 0.0 : (v < 0.5 ? 0.5 : 1.0);
  }
  d.transition_count = transition_signature(d);
  return d;
}

// Direct evaluation of the weighted per-channel cosine, written out with
// explicit loops over bins.
double oracle_similarity(const RadialDescriptor& a, const RadialDescriptor& b, int shift,
                         const std::array<double, kNumChannels>& w, ChannelMask mask) {
  const int n = a.n_bins();
  double total_w = 0.0, acc = 0.0;
  for (int c = 0; c < kNumChannels; ++c) {
    if (!mask[c] || !a.active[c] || !b.active[c]) continue;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = a.channels(c, (j + shift) % n);
      const double y = b.channels(c, j);
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    double cosine;
    if (na == 0.0 && nb == 0.0) {
      cosine = 1.0;
    } else if (na == 0.0 || nb == 0.0) {
      cosine = 0.0;
    } else {
      cosine = dot / std::sqrt(na * nb);
    }
    total_w += w[c];
    acc += w[c] * cosine;
  }
  return acc / total_w;
}

TEST(Similarity, MatchesOracle) {
  std::mt19937_64 rng(11);
  MatchConfig cfg;
  cfg.channel_weights = {0.1, 0.4, 0.2, 0.2, 0.1};
  for (int t = 0; t < 20; ++t) {
    const RadialDescriptor a = random_descriptor(rng, 72);
    const RadialDescriptor b = random_descriptor(rng, 72);
    const int s = static_cast<int>(rng() % 72);
    EXPECT_NEAR(similarity_at_shift(a, b, s, cfg), oracle_similarity(a, b, s, cfg.channel_weights, kAllChannels),
                1e-12);
  }
}

TEST(Similarity, PeaksAtAppliedShift) {
  std::mt19937_64 rng(12);
  const RadialDescriptor a = random_descriptor(rng, 360);
  const RadialDescriptor b = cyclic_shift(a, 90);
  const MatchConfig cfg;
  EXPECT_NEAR(similarity_at_shift(a, b, 90, cfg), 1.0, 1e-12);
  EXPECT_EQ(best_shift_fft(a, b, cfg).shift, 90);
  // Swapping the roles gives the complementary shift.
  EXPECT_EQ(best_shift_fft(b, a, cfg).shift, 270);
  // Brute force agrees.
  std::vector<double> brute(360);
  for (int s = 0; s < 360; ++s) brute[s] = similarity_at_shift(a, b, s, cfg);
  EXPECT_EQ(argmax_shift(brute), 90);
}

TEST(Similarity, ZeroRowConvention) {
  RadialDescriptor a(16), b(16);
  a.active = b.active = kHitTypeOnly;
  MatchConfig cfg;
  EXPECT_DOUBLE_EQ(similarity_at_shift(a, b, 0, cfg), 1.0);
  b.channels(kHitTypeChannel, 3) = 1.0;
  EXPECT_DOUBLE_EQ(similarity_at_shift(a, b, 0, cfg), 0.0);
  EXPECT_DOUBLE_EQ(best_shift_fft(a, b, cfg).score, 0.0);
  EXPECT_EQ(best_shift_fft(a, b, cfg).shift, 0);
}

TEST(Similarity, WeightsRenormalizeOverSharedChannels) {
  std::mt19937_64 rng(13);
  RadialDescriptor a = random_descriptor(rng, 36);
  const RadialDescriptor b = random_descriptor(rng, 36);
  a.active = kHitTypeOnly;
  MatchConfig cfg;
  // Only the hit-type channel is shared, so its weight becomes 1.
  const double expected = oracle_similarity(a, b, 5, {0, 1, 0, 0, 0}, kHitTypeOnly);
  EXPECT_NEAR(similarity_at_shift(a, b, 5, cfg), expected, 1e-12);
  cfg.channel_mask = ChannelMask{0b00001};
  EXPECT_THROW(similarity_at_shift(a, b, 5, cfg), std::invalid_argument);
}

TEST(Similarity, ShapeMismatchThrows) {
  RadialDescriptor a(16), b(32);
  EXPECT_THROW(similarity_at_shift(a, b, 0, MatchConfig{}), std::invalid_argument);
  EXPECT_THROW(best_shift_fft(a, b, MatchConfig{}), std::invalid_argument);
}

TEST(Similarity, FlattenedMode) {
  std::mt19937_64 rng(14);
  const RadialDescriptor a = random_descriptor(rng, 40);
  const RadialDescriptor b = random_descriptor(rng, 40);
  MatchConfig cfg;
  cfg.flattened = true;
  cfg.channel_mask = ChannelMask{0b00011};
  const int s = 7;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int j = 0; j < 40; ++j) {
      const double x = a.channels(c, (j + s) % 40), y = b.channels(c, j);
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
  }
  EXPECT_NEAR(similarity_at_shift(a, b, s, cfg), dot / std::sqrt(na * nb), 1e-12);
  const std::vector<double> curve = correlation_curve(a, b, cfg);
  EXPECT_NEAR(curve[s], dot / std::sqrt(na * nb), 1e-9);
}

TEST(Correlator, FftMatchesBruteForce) {
  std::mt19937_64 rng(15);
  for (int n : {8, 45, 360, 720}) {
    CircularCorrelator corr(n);
    const RadialDescriptor a = random_descriptor(rng, n);
    const RadialDescriptor b = random_descriptor(rng, n);
    const MatchConfig cfg;
    const std::vector<double> fast = corr.scores(a, b, cfg);
    ASSERT_EQ(static_cast<int>(fast.size()), n);
    for (int s = 0; s < n; ++s) EXPECT_NEAR(fast[s], similarity_at_shift(a, b, s, cfg), 1e-9) << n << " " << s;
  }
}

TEST(Correlator, ScoresClampedToUnitInterval) {
  std::mt19937_64 rng(16);
  const RadialDescriptor a = random_descriptor(rng, 64);
  for (double v : correlation_curve(a, a, MatchConfig{})) {
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, -1.0);
  }
  EXPECT_EQ(best_shift_fft(a, a, MatchConfig{}).score, 1.0);
}

TEST(ArgmaxShift, SmallestIndexAmongTies) {
  EXPECT_EQ(argmax_shift({0.1, 0.5, 0.5, 0.2}), 1);
  EXPECT_EQ(argmax_shift({0.5 - 1e-13, 0.5}), 0);
  EXPECT_EQ(argmax_shift({0.2, 0.5 + 1e-6}), 1);
  EXPECT_THROW(argmax_shift({}), std::invalid_argument);
}

DescriptorDatabase room_database() {
  FloorPlanRaster room = testing::square_room(10.0, 0.02);
  for (int col = 100; col < 180; ++col) {
    room.set_window(col, 0, true);
    room.set_window(col, 1, true);
  }
  for (int row = 200; row < 260; ++row) {
    room.set_window(499, row, true);
    room.set_window(500, row, true);
  }
  for (int row = 100; row < 300; ++row) room.set_wall(300, row, true);
  RaycastConfig cfg;
  BuildOptions opt;
  opt.grid_step = 1.0;
  return build_database(room, opt, cfg);
}

TEST(MatchQuery, RecoversPoseAndHeading) {
  const DescriptorDatabase db = room_database();
  ASSERT_GT(db.size(), 20u);
  MatchConfig cfg;
  cfg.top_k = 3;
  for (size_t idx : {size_t{3}, size_t{17}, db.size() - 2}) {
    for (int k : {0, 45, 200}) {
      const RadialDescriptor q = cyclic_shift(db.entries[idx].descriptor, k);
      const auto results = match_query(q, db, cfg);
      ASSERT_EQ(results.size(), 3u);
      EXPECT_EQ(results[0].candidate_index, idx);
      EXPECT_EQ(results[0].best_shift, k);
      EXPECT_NEAR(results[0].yaw, kTwoPi * k / 360.0, 1e-12);
      EXPECT_NEAR(results[0].score, 1.0, 1e-9);
      EXPECT_GE(results[0].score, results[1].score);
      EXPECT_GE(results[1].score, results[2].score);
    }
  }
}

TEST(MatchQuery, ThreadsGiveIdenticalRanking) {
  const DescriptorDatabase db = room_database();
  const RadialDescriptor q = cyclic_shift(db.entries[5].descriptor, 33);
  MatchConfig cfg;
  cfg.top_k = static_cast<int>(db.size());
  const auto a = match_query(q, db, cfg);
  cfg.num_threads = 3;
  const auto b = match_query(q, db, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].candidate_index, b[i].candidate_index);
    EXPECT_EQ(a[i].best_shift, b[i].best_shift);
    EXPECT_EQ(a[i].score, b[i].score);
  }
}

TEST(MatchQuery, PrefilterDropsDistantSignatures) {
  const DescriptorDatabase db = room_database();
  RadialDescriptor q = db.entries[4].descriptor;
  MatchConfig cfg;
  cfg.top_k = static_cast<int>(db.size());
  cfg.prefilter_tolerance = 0;
  const auto results = match_query(q, db, cfg);
  size_t expected = 0;
  for (const auto& e : db.entries) expected += e.descriptor.transition_count == q.transition_count;
  EXPECT_EQ(results.size(), expected);
  for (const auto& r : results) {
    EXPECT_EQ(db.entries[r.candidate_index].descriptor.transition_count, q.transition_count);
  }
  q.transition_count = 10000;
  EXPECT_THROW(match_query(q, db, cfg), EmptyFilterError);
}

TEST(MatchQuery, EmptyDatabaseAndBadConfig) {
  DescriptorDatabase db;
  RadialDescriptor q(360);
  EXPECT_THROW(match_query(q, db, MatchConfig{}), EmptyResultError);
  MatchConfig cfg;
  cfg.top_k = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = MatchConfig{};
  cfg.channel_weights[0] = -0.1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(MatchQuery, HitTypeOnlyQueryAgainstFullDatabase) {
  const DescriptorDatabase db = room_database();
  // The entry seeing the most glazing has an aperiodic hit-type row.
  size_t idx = 0;
  long best_windows = -1;
  for (size_t i = 0; i < db.size(); ++i) {
    const auto labels = hit_labels(db.entries[i].descriptor);
    const long w = std::count(labels.begin(), labels.end(), HitType::kWindow);
    if (w > best_windows) {
      best_windows = w;
      idx = i;
    }
  }
  ASSERT_GT(best_windows, 0);
  RadialDescriptor q = cyclic_shift(db.entries[idx].descriptor, 120);
  q.channels.row(kRangeChannel).setZero();
  q.channels.row(kGradientChannel).setZero();
  q.channels.row(kInverseRangeChannel).setZero();
  q.channels.row(kVarianceChannel).setZero();
  q.active = kHitTypeOnly;
  MatchConfig cfg;
  cfg.top_k = static_cast<int>(db.size());
  const auto results = match_query(q, db, cfg);
  bool found = false;
  for (const auto& r : results) {
    if (r.candidate_index == idx) {
      found = true;
      EXPECT_EQ(r.best_shift, 120);
      EXPECT_NEAR(r.score, 1.0, 1e-9);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Agreement, CountsMatchingLabels) {
  RadialDescriptor a(10), b(10);
  a.channels.row(kHitTypeChannel).setConstant(1.0);
  b.channels.row(kHitTypeChannel).setConstant(1.0);
  a.channels(kHitTypeChannel, 3) = 0.5;
  b.channels(kHitTypeChannel, 1) = 0.5;
  EXPECT_EQ(hit_type_agreement(a, b, 2).agree_bins, 10);
  EXPECT_EQ(hit_type_agreement(a, b, 0).agree_bins, 8);
  EXPECT_DOUBLE_EQ(hit_type_agreement(a, b, 0).fraction, 0.8);
}

TEST(DatabaseIo, RoundTripStoresSinglePrecision) {
  const DescriptorDatabase db = room_database();
  std::stringstream buf;
  write_database(buf, db);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 8), "CMPSDESC");
  EXPECT_EQ(bytes.size(), 140 + db.size() * (8 + 8 + 4 + 4 * kNumChannels * 360));
  const DescriptorDatabase back = read_database(buf);
  ASSERT_EQ(back.size(), db.size());
  EXPECT_EQ(back.config.n_bins, db.config.n_bins);
  EXPECT_EQ(back.config.r_max, db.config.r_max);
  EXPECT_EQ(back.grid.nx, db.grid.nx);
  EXPECT_EQ(back.grid.first_center, db.grid.first_center);
  EXPECT_EQ(back.active, db.active);
  for (size_t i = 0; i < db.size(); ++i) {
    EXPECT_EQ(back.entries[i].position, db.entries[i].position);
    EXPECT_EQ(back.entries[i].descriptor.transition_count, db.entries[i].descriptor.transition_count);
    EXPECT_EQ(back.entries[i].descriptor.channels, db.entries[i].descriptor.channels.cast<float>().cast<double>());
  }
}

TEST(DatabaseIo, RejectsCorruptFiles) {
  const DescriptorDatabase db = room_database();
  std::stringstream buf;
  write_database(buf, db);
  std::string bytes = buf.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(read_database(truncated), IoError);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream s1(bad_magic);
  EXPECT_THROW(read_database(s1), IoError);

  std::string bad_version = bytes;
  bad_version[8] = 9;
  std::stringstream s2(bad_version);
  EXPECT_THROW(read_database(s2), IoError);

  EXPECT_THROW(read_database(std::string("/nonexistent/compass.db")), IoError);
}

TEST(DatabaseIo, SingleDescriptorFile) {
  std::mt19937_64 rng(17);
  RadialDescriptor d = random_descriptor(rng, 360);
  d.active = kHitTypeOnly;
  testing::TempDir dir("dbio");
  write_database(dir.file("q.cmpd"), single_descriptor_file(d, RaycastConfig{}, {1.5, 2.5}));
  const DescriptorDatabase back = read_database(dir.file("q.cmpd"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.active, kHitTypeOnly);
  EXPECT_EQ(back.entries[0].descriptor.active, kHitTypeOnly);
  EXPECT_EQ(back.entries[0].position, Eigen::Vector2d(1.5, 2.5));
}

}  // namespace
}  // namespace compass
