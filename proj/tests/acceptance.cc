// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <Eigen/Geometry>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include "compass/attitude.h"
#include "compass/fisheye.h"
#include "compass/matching.h"
#include "compass/raycast.h"
#include "compass/reports.h"
#include "compass/synth.h"
#include "compass/synth_images.h"
#include "compass/window_detection.h"

namespace compass {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

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

// Position at least `clearance` meters from any structure pixel.
Eigen::Vector2d random_free_position(const FloorPlanRaster& plan, const SynthPlanSpec& spec, std::mt19937_64& rng,
                                     double clearance) {
  std::uniform_real_distribution<double> ux(0.0, spec.width), uy(0.0, spec.height);
  for (;;) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    if (distance_to_structure(plan, p, clearance + 1.0) > clearance) return p;
  }
}

Outcome fft_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const MatchConfig cfg;
  int argmax_mismatch = 0;
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const RadialDescriptor a = random_descriptor(rng, 360);
    const RadialDescriptor b = random_descriptor(rng, 360);
    const ShiftScore fft = best_shift_fft(a, b, cfg);
    const std::vector<double> curve = correlation_curve(a, b, cfg);
    std::vector<double> brute(360);
    for (int s = 0; s < 360; ++s) {
      brute[s] = similarity_at_shift(a, b, s, cfg);
      worst = std::max(worst, std::abs(curve[s] - brute[s]));
    }
    const int best = argmax_shift(brute);
    if (best != fft.shift) ++argmax_mismatch;
    worst = std::max(worst, std::abs(fft.score - brute[best]));
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "argmax mismatches " << argmax_mismatch << "/100, max |score diff| " << worst << ", " << elapsed << " s";
  return {argmax_mismatch == 0 && worst < 1e-9 && elapsed < 5.0, d.str()};
}

Outcome rotation_equivariance() {
  SynthPlanSpec spec;
  const FloorPlanRaster plan = generate_plan(spec, 2);
  const RaycastConfig cfg;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> uyaw(0.0, kTwoPi);
  std::uniform_int_distribution<int> ushift(1, cfg.n_bins - 1);
  int failures = 0;
  for (int p = 0; p < 50; ++p) {
    const Eigen::Vector2d pos = random_free_position(plan, spec, rng, 0.3);
    const Pose2D base(pos.x(), pos.y(), uyaw(rng));
    const RadialDescriptor d0 = compute_descriptor(plan, base, cfg);
    for (int i = 0; i < 10; ++i) {
      const int k = ushift(rng);
      const Pose2D turned(base.x, base.y, base.yaw + kTwoPi * k / cfg.n_bins);
      const RadialDescriptor dk = compute_descriptor(plan, turned, cfg);
      if (dk.channels != cyclic_shift(d0, k).channels) ++failures;
    }
  }
  return {failures == 0, std::to_string(failures) + "/500 pose-shift pairs differ"};
}

Outcome self_localization() {
  SynthPlanSpec spec;
  const FloorPlanRaster plan = generate_plan(spec, 1);
  BuildOptions options;
  options.grid_step = 0.5;
  const RaycastConfig rc;
  const DescriptorDatabase db = build_database(plan, options, rc);

  EvalConfig cfg;
  cfg.trials = 200;
  cfg.seed = 7;
  cfg.unique_only = true;
  cfg.match.channel_mask = kHitTypeOnly;
  const EvalReport clean = run_localization_eval(plan, db, cfg);
  int recovered = 0;
  for (const auto& t : clean.records) recovered += (t.rank == 1 && t.yaw_error_deg < 0.5);
  const double clean_rate = recovered / static_cast<double>(clean.records.size());

  cfg.noise.dropout = 0.2;
  cfg.noise.jitter_deg = 1.0;
  const EvalReport noisy = run_localization_eval(plan, db, cfg);
  const double noisy_rate = noisy.summary.true_cell_yaw_rate_2deg;

  std::ostringstream d;
  d << "noiseless rank-1 with yaw < 0.5 deg " << clean_rate << ", noisy true-cell yaw < 2 deg " << noisy_rate
    << " (" << db.size() << " candidates)";
  return {clean_rate >= 0.95 && noisy_rate >= 0.8, d.str()};
}

CameraModel distorted_camera() {
  CameraModel cam = default_test_camera();
  cam.distortion = {-0.021, 0.0032, -0.00041, 0.000017};
  return cam;
}

Outcome fisheye_round_trips() {
  std::mt19937_64 rng(404);
  double worst_px = 0.0, worst_rad = 0.0;
  for (const CameraModel& cam : {default_test_camera(), distorted_camera()}) {
    std::uniform_real_distribution<double> ur(0.0, 1.0), uphi(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
      const double r = cam.fov_radius() * std::sqrt(ur(rng));
      const double phi = uphi(rng);
      const Eigen::Vector2d px = cam.principal_point + r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      worst_px = std::max(worst_px, (project(cam, unproject(cam, px)) - px).norm());

      const double theta = cam.theta_max * ur(rng);
      const Eigen::Vector3d b(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      const Eigen::Vector3d back = unproject(cam, project(cam, b));
      worst_rad = std::max(worst_rad, std::atan2(b.cross(back).norm(), b.dot(back)));
    }
  }
  std::ostringstream d;
  d << "max pixel error " << worst_px << ", max angular error " << worst_rad << " rad";
  return {worst_px < 1e-6 && worst_rad < 1e-9, d.str()};
}

Outcome attitude_recovery() {
  const RigCamera cam{0, "front", default_test_camera(), 0.0};
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-deg_to_rad(15.0), deg_to_rad(15.0));
  int ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    LineSceneSpec spec;
    spec.camera = cam.model;
    spec.roll = u(rng);
    spec.pitch = u(rng);
    spec.outlier_fraction = 0.2;
    spec.pixel_noise = 0.5;
    const LineScene scene = generate_line_scene(spec, 1000 + t);
    AttitudeConfig cfg;
    cfg.ransac.seed = t;
    const CameraAttitude a = estimate_camera_attitude(scene.segments, cam, cfg);
    if (!a.estimate) continue;
    const double err = rad_to_deg(
        std::max(std::abs(a.estimate->roll - spec.roll), std::abs(a.estimate->pitch - spec.pitch)));
    worst = std::max(worst, err);
    if (err <= 0.5) ++ok;
  }
  std::ostringstream d;
  d << ok << "/50 trials within 0.5 deg, worst " << worst << " deg";
  return {ok >= 48, d.str()};
}

Outcome window_corpus() {
  DetectionScore total;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const WindowScene scene = generate_window_scene({}, 5000 + seed);
    const auto r = detect_windows(scene.gray, {}, nullptr, &scene.color);
    const DetectionScore s = score_detections(scene.windows, r.detections, 0.5);
    total.true_positives += s.true_positives;
    total.false_positives += s.false_positives;
    total.false_negatives += s.false_negatives;
  }
  std::ostringstream d;
  d << "precision " << total.precision() << ", recall " << total.recall() << " (tp " << total.true_positives
    << ", fp " << total.false_positives << ", fn " << total.false_negatives << ")";
  return {total.precision() >= 0.9 && total.recall() >= 0.9, d.str()};
}

Outcome performance() {
  std::mt19937_64 rng(707);
  DescriptorDatabase db;
  db.grid.step = 1.0;
  for (int i = 0; i < 10000; ++i) db.entries.push_back({Eigen::Vector2d(i % 100, i / 100), random_descriptor(rng, 360)});
  const RadialDescriptor query = cyclic_shift(db.entries[4321].descriptor, 77);
  MatchConfig mcfg;
  mcfg.num_threads = 1;
  auto t0 = Clock::now();
  const auto results = match_query(query, db, mcfg);
  const double match_s = seconds_since(t0);
  const bool match_ok = !results.empty() && results[0].candidate_index == 4321 && results[0].best_shift == 77;

  SynthPlanSpec spec;
  spec.width = 40.0;
  spec.height = 30.0;
  const FloorPlanRaster plan = generate_plan(spec, 3);
  BuildOptions options;
  options.grid_step = 0.5;
  options.num_threads = 1;
  t0 = Clock::now();
  const DescriptorDatabase big = build_database(plan, options, RaycastConfig{});
  const double build_s = seconds_since(t0);

  std::ostringstream d;
  d << "match 10000 candidates " << match_s << " s, build " << big.size() << " candidates " << build_s << " s";
  return {match_ok && match_s < 1.0 && build_s < 60.0, d.str()};
}

Outcome report_formats() {
  SynthPlanSpec spec;
  const FloorPlanRaster plan = generate_plan(spec, 1);
  const RaycastConfig rc;
  const Pose2D pose(5.25, 3.75, deg_to_rad(40.0));
  const RadialDescriptor map = compute_descriptor(plan, Pose2D(pose.x, pose.y, 0.0), rc);
  ObservationNoise noise;
  noise.dropout = 0.3;
  noise.spurious_rate = 1.0;
  const RadialDescriptor visual = simulate_observation(plan, pose, rc, noise, 9);

  MatchConfig mcfg;
  mcfg.channel_mask = kHitTypeOnly;
  std::ostringstream curve;
  write_correlation_csv(curve, correlation_curve(map, visual, mcfg), 0.0, "");
  const bool curve_ok = std::regex_search(
      curve.str(), std::regex("^# peak_shift: \\d+\n# peak_yaw_deg: [0-9.]+\n# peak_score: -?[0-9.]+\n"
                              "shift,yaw_deg,score\n"));

  const int shift = best_shift_fft(map, visual, mcfg).shift;
  const std::string agreement = format_agreement(agreement_report(visual, map, shift));
  const bool agreement_ok = std::regex_match(agreement, std::regex("\\d+ out of 360 bins \\(\\d+%\\)"));

  std::ostringstream stats;
  write_descriptor_stats(stats, descriptor_stats(map, rc));
  const bool stats_ok = std::regex_search(stats.str(), std::regex("window bins: \\d+\n")) &&
                        std::regex_search(stats.str(), std::regex("range span \\(m\\): [0-9.]+ - [0-9.]+ \\([0-9.]+\\)\n")) &&
                        std::regex_search(stats.str(), std::regex("mean gradient: [0-9.]+\n"));
  std::ostringstream d;
  d << "correlation " << (curve_ok ? "ok" : "bad") << ", agreement \"" << agreement << "\", stats "
    << (stats_ok ? "ok" : "bad");
  return {curve_ok && agreement_ok && stats_ok, d.str()};
}

}  // namespace
}  // namespace compass

int main() {
  using compass::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"FFT/brute-force equivalence", compass::fft_equivalence},
      {"rotation equivariance", compass::rotation_equivariance},
      {"self-localization oracle", compass::self_localization},
      {"fisheye round trips", compass::fisheye_round_trips},
      {"attitude recovery", compass::attitude_recovery},
      {"window detector corpus", compass::window_corpus},
      {"performance", compass::performance},
      {"report formats", compass::report_formats},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
