// compass: command-line front end for floor-plan localization.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 empty result,
// 3 I/O failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "compass/attitude.h"
#include "compass/csv_io.h"
#include "compass/database_io.h"
#include "compass/fisheye.h"
#include "compass/floorplan.h"
#include "compass/matching.h"
#include "compass/raycast.h"
#include "compass/reports.h"
#include "compass/svg.h"
#include "compass/synth.h"
#include "compass/window_detection.h"

namespace fs = std::filesystem;
using namespace compass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEmpty = 2;
constexpr int kExitIo = 3;

struct Globals {
  std::string output_dir;
  int verbosity = 0;
};

Globals g_globals;

void log(int level, const std::string& msg) {
  if (g_globals.verbosity >= level) std::cerr << msg << "\n";
}

// Output paths are relative to the output directory unless absolute.
std::string output_path(const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || g_globals.output_dir.empty()) return p;
  return (fs::path(g_globals.output_dir) / p).string();
}

std::ofstream open_output(const std::string& p) {
  const std::string path = output_path(p);
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void write_text(const std::string& p, const std::string& text) {
  auto out = open_output(p);
  out << text;
}

// Options that name output files stay out of the echoed configuration so
// that outputs are identical wherever they are written.
const std::set<std::string> kNotEchoed = {"out", "svg", "json", "curve", "curve-svg", "summary", "stats",
                                          "segments-out", "svg-front", "svg-back", "plan-out"};

std::string header_for(const CLI::App* sub) {
  ConfigEntries entries;
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (kNotEchoed.count(key)) continue;
    entries.emplace_back(key, value);
  }
  return make_header(sub->get_name(), entries);
}

struct RaycastOptions {
  RaycastConfig cfg;
  void add(CLI::App* app) {
    app->add_option("--bins", cfg.n_bins, "Azimuth bins")->capture_default_str();
    app->add_option("--r-max", cfg.r_max, "Maximum ray range (m)")->capture_default_str();
    app->add_option("--step", cfg.step, "Ray marching step (m)")->capture_default_str();
    app->add_option("--r-clip", cfg.r_clip, "Range-gradient clip (m)")->capture_default_str();
    app->add_option("--sigma-clip", cfg.sigma_clip, "Local range std clip (m)")->capture_default_str();
    app->add_option("--var-halfwidth", cfg.var_halfwidth, "Local std half-width (bins)")->capture_default_str();
  }
};

struct PlanInput {
  std::string plan;
  std::string meta;
  void add(CLI::App* app) {
    app->add_option("--plan", plan, "Floor plan image (PNG)")->required()->check(CLI::ExistingFile);
    app->add_option("--meta", meta, "Metadata JSON (default: image path with .json)");
  }
  FloorPlanRaster load() const {
    const std::string m = meta.empty() ? default_metadata_path(plan) : meta;
    return load_floorplan(plan, read_plan_metadata(m));
  }
};

struct MatchOptions {
  MatchConfig cfg;
  std::vector<double> weights;
  std::string channels = "11111";
  bool hit_type_only = false;
  int prefilter = -1;

  void add(CLI::App* app) {
    app->add_option("--weights", weights, "Five channel weights")->expected(5);
    app->add_option("--channels", channels, "Channel mask, channel 0 first, e.g. 01000")->capture_default_str();
    app->add_flag("--hit-type-only", hit_type_only, "Compare only the hit-type channel");
    app->add_option("--prefilter", prefilter, "Transition-count tolerance (negative disables)")->capture_default_str();
    app->add_option("--top-k", cfg.top_k, "Results kept")->capture_default_str();
    app->add_flag("--flattened", cfg.flattened, "Single cosine over all active rows");
    app->add_option("--threads", cfg.num_threads, "Worker threads")->capture_default_str();
  }

  MatchConfig resolve() const {
    MatchConfig out = cfg;
    if (!weights.empty()) std::copy(weights.begin(), weights.end(), out.channel_weights.begin());
    if (channels.size() != kNumChannels || channels.find_first_not_of("01") != std::string::npos) {
      throw std::invalid_argument("--channels expects five 0/1 characters");
    }
    out.channel_mask.reset();
    for (int c = 0; c < kNumChannels; ++c) out.channel_mask.set(c, channels[c] == '1');
    if (hit_type_only) out.channel_mask = kHitTypeOnly;
    if (prefilter >= 0) out.prefilter_tolerance = prefilter;
    out.validate();
    return out;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct GenPlanCmd {
  SynthPlanSpec spec;
  uint64_t seed = 1;
  std::string out = "plan.png";

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("gen-plan", "Generate a synthetic floor plan (PNG + JSON sidecar)");
    sub->add_option("--width", spec.width, "Building width (m)")->capture_default_str();
    sub->add_option("--height", spec.height, "Building depth (m)")->capture_default_str();
    sub->add_option("--resolution", spec.resolution, "Meters per pixel")->capture_default_str();
    sub->add_option("--wall-thickness", spec.wall_thickness, "Wall thickness (m)")->capture_default_str();
    sub->add_option("--depth", spec.partition_depth, "Room partition depth")->capture_default_str();
    sub->add_option("--min-room", spec.min_room_size, "Minimum room size (m)")->capture_default_str();
    sub->add_option("--window-fraction", spec.windows.facade_fraction, "Window length per facade length")
        ->capture_default_str();
    sub->add_option("--window-min", spec.windows.min_width, "Minimum window width (m)")->capture_default_str();
    sub->add_option("--window-max", spec.windows.max_width, "Maximum window width (m)")->capture_default_str();
    sub->add_option("--door-width", spec.doorways.width, "Doorway width (m)")->capture_default_str();
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--out", out, "Output PNG")->capture_default_str();
    sub->callback([this] { run(); });
  }

  void run() {
    const FloorPlanRaster raster = generate_plan(spec, seed);
    const std::string path = output_path(out);
    if (!fs::path(path).parent_path().empty()) fs::create_directories(fs::path(path).parent_path());
    save_floorplan(raster, path, default_metadata_path(path));
    std::cout << "plan " << raster.width() << "x" << raster.height() << " px, " << raster.count_walls()
              << " wall px, " << raster.count_windows() << " window px -> " << path << "\n";
  }
};

struct BuildDbCmd {
  PlanInput plan;
  RaycastOptions ray;
  double grid_step = 0.5;
  double yaw_anchor_deg = 0.0;
  double clearance = 0.3;
  int threads = 1;
  std::string out = "db.bin";
  std::string json;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("build-db", "Build the descriptor database of a floor plan");
    plan.add(sub);
    ray.add(sub);
    sub->add_option("--grid-step", grid_step, "Candidate grid spacing (m)")->capture_default_str();
    sub->add_option("--yaw-anchor-deg", yaw_anchor_deg, "Database heading (deg)")->capture_default_str();
    sub->add_option("--clearance", clearance, "Minimum distance to structure (m)")->capture_default_str();
    sub->add_option("--threads", threads, "Worker threads")->capture_default_str();
    sub->add_option("--out", out, "Database file")->capture_default_str();
    sub->add_option("--json", json, "Optional JSON debug export");
    sub->callback([this] { run(); });
  }

  void run() {
    const auto t0 = std::chrono::steady_clock::now();
    const FloorPlanRaster raster = plan.load();
    BuildOptions opts;
    opts.grid_step = grid_step;
    opts.yaw_anchor = deg_to_rad(yaw_anchor_deg);
    opts.free_space = clearance_predicate(clearance);
    opts.num_threads = threads;
    RaycastStats stats;
    const DescriptorDatabase db = build_database(raster, opts, ray.cfg, &stats);
    {
      auto f = open_output(out);
      write_database(f, db);
    }
    if (!json.empty()) {
      auto f = open_output(json);
      write_database_json(f, db);
    }
    std::cout << "candidates: " << db.size() << " (grid " << db.grid.nx << "x" << db.grid.ny << ")\n"
              << "rays: " << stats.rays << ", probes: " << stats.probes << "\n"
              << "time: " << format_double(seconds_since(t0), 3) << " s\n";
  }
};

struct DescribeCmd {
  PlanInput plan;
  RaycastOptions ray;
  double x = 0.0, y = 0.0, yaw_deg = 0.0;
  std::string out = "descriptor.bin";
  std::string svg;
  std::string stats;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("describe", "Compute the descriptor at one pose");
    plan.add(sub);
    ray.add(sub);
    sub->add_option("--x", x, "Position x (m)")->required();
    sub->add_option("--y", y, "Position y (m)")->required();
    sub->add_option("--yaw-deg", yaw_deg, "Heading (deg)")->capture_default_str();
    sub->add_option("--out", out, "Descriptor file")->capture_default_str();
    sub->add_option("--svg", svg, "Optional channel/polar plot");
    sub->add_option("--stats", stats, "Optional statistics text file");
    sub->callback([this] { run(); });
  }

  void run() {
    const FloorPlanRaster raster = plan.load();
    const Pose2D pose(x, y, deg_to_rad(yaw_deg));
    const RadialDescriptor d = compute_descriptor(raster, pose, ray.cfg);
    {
      auto f = open_output(out);
      write_database(f, single_descriptor_file(d, ray.cfg, pose.position()));
    }
    const std::string header = header_for(sub);
    const DescriptorStats s = descriptor_stats(d, ray.cfg);
    std::ostringstream text;
    text << header;
    write_descriptor_stats(text, s);
    std::cout << text.str();
    if (!stats.empty()) write_text(stats, text.str());
    if (!svg.empty()) write_text(svg, descriptor_svg(d, ray.cfg, header));
  }
};

struct DetectWindowsCmd {
  std::string image;
  std::string rig_path;
  int camera_id = 0;
  std::string segments_in;
  WindowDetectorConfig cfg;
  double vertical_angle_deg = 30.0;
  std::string out = "detections.csv";
  std::string segments_out;
  std::string svg;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("detect-windows", "Detect windows in a fisheye image");
    sub->add_option("--image", image, "Input image (PNG)")->required()->check(CLI::ExistingFile);
    sub->add_option("--rig", rig_path, "Rig JSON; enables the periphery filter")->check(CLI::ExistingFile);
    sub->add_option("--camera-id", camera_id, "Camera id written to detections")->capture_default_str();
    sub->add_option("--segments", segments_in, "Use segments from CSV instead of detecting them")
        ->check(CLI::ExistingFile);
    sub->add_option("--min-length", cfg.segments.min_length, "Minimum segment length (px)")->capture_default_str();
    sub->add_option("--gradient-threshold", cfg.segments.gradient_threshold, "Edge gradient threshold")
        ->capture_default_str();
    sub->add_option("--anchor-threshold", cfg.segments.anchor_threshold, "Extra anchor gradient")
        ->capture_default_str();
    sub->add_option("--brightness-percentile", cfg.band.brightness_percentile, "Band brightness percentile")
        ->capture_default_str();
    sub->add_option("--smoothing-rows", cfg.band.smoothing_rows, "Band smoothing window (rows)")
        ->capture_default_str();
    sub->add_option("--vertical-angle-deg", vertical_angle_deg, "Minimum edge angle from horizontal")
        ->capture_default_str();
    sub->add_option("--cluster-length", cfg.clusters.min_length, "Minimum edge length for clustering (px)")
        ->capture_default_str();
    sub->add_option("--gap", cfg.clusters.gap, "Cluster gap (px)")->capture_default_str();
    sub->add_option("--min-sep", cfg.pairing.min_separation, "Minimum edge separation (px)")->capture_default_str();
    sub->add_option("--max-sep", cfg.pairing.max_separation, "Maximum edge separation (px)")->capture_default_str();
    sub->add_option("--overlap", cfg.pairing.min_overlap_ratio, "Minimum vertical overlap ratio")
        ->capture_default_str();
    sub->add_option("--contrast", cfg.verify.contrast_margin, "Interior over wall brightness margin")
        ->capture_default_str();
    sub->add_option("--texture", cfg.verify.texture_floor, "Interior std floor")->capture_default_str();
    sub->add_option("--bright-sky", cfg.verify.bright_sky, "Interior mean passing without texture")
        ->capture_default_str();
    sub->add_option("--iou", cfg.suppression.iou_threshold, "NMS IoU threshold")->capture_default_str();
    sub->add_option("--out", out, "Detections CSV")->capture_default_str();
    sub->add_option("--segments-out", segments_out, "Optional segments CSV");
    sub->add_option("--svg", svg, "Optional overlay SVG");
    sub->callback([this] { run(); });
  }

  void run() {
    cfg.band.vertical_angle = deg_to_rad(vertical_angle_deg);
    cfg.clusters.min_angle = deg_to_rad(vertical_angle_deg);
    const RgbImage color = read_png_rgb(image);
    const GrayImage gray = to_gray(color);
    std::optional<CameraRig> rig;
    const CameraModel* camera = nullptr;
    if (!rig_path.empty()) {
      rig = read_rig(rig_path);
      camera = &rig->camera(camera_id).model;
    }
    std::vector<LineSegment> imported;
    if (!segments_in.empty()) imported = read_segments_csv(segments_in);
    const WindowDetectionResult r =
        detect_windows(gray, cfg, camera, &color, segments_in.empty() ? nullptr : &imported, camera_id);
    const std::string header = header_for(sub);
    {
      auto f = open_output(out);
      write_detections_csv(f, r.detections, header);
    }
    if (!segments_out.empty()) {
      auto f = open_output(segments_out);
      write_segments_csv(f, r.segments, header);
    }
    if (!svg.empty()) {
      write_text(svg, detection_overlay_svg(gray.width, gray.height, r.segments, r.window_segments, r.detections,
                                            header));
    }
    std::cout << "segments: " << r.segments.size() << "\nband: " << r.band.y_top << "-" << r.band.y_bot
              << "\nclusters: " << r.clusters.size() << "\nwindows: " << r.detections.size() << "\n";
  }
};

struct VisualDescriptorCmd {
  std::vector<std::string> detections;
  std::string rig_path;
  int bins = 360;
  std::string out = "visual.bin";
  std::string svg;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("visual-descriptor", "Build the hit-type descriptor from window detections");
    sub->add_option("--detections", detections, "Detection CSV files (any cameras)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--rig", rig_path, "Rig JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--bins", bins, "Azimuth bins")->capture_default_str();
    sub->add_option("--out", out, "Descriptor file")->capture_default_str();
    sub->add_option("--svg", svg, "Optional descriptor plot");
    sub->callback([this] { run(); });
  }

  void run() {
    const CameraRig rig = read_rig(rig_path);
    std::vector<WindowDetection> all;
    for (const auto& p : detections) {
      auto d = read_detections_csv(p);
      all.insert(all.end(), d.begin(), d.end());
    }
    const RadialDescriptor d = build_visual_descriptor(all, rig, bins);
    RaycastConfig cfg;
    cfg.n_bins = bins;
    {
      auto f = open_output(out);
      write_database(f, single_descriptor_file(d, cfg));
    }
    if (!svg.empty()) write_text(svg, descriptor_svg(d, cfg, header_for(sub)));
    const DescriptorStats s = descriptor_stats(d, cfg);
    std::cout << "detections: " << all.size() << "\nwindow bins: " << s.window_bins
              << "\nwindow segments: " << s.window_segments << "\n";
  }
};

RadialDescriptor read_single_descriptor(const std::string& path) {
  const DescriptorDatabase f = read_database(path);
  if (f.size() != 1) throw IoError("'" + path + "' holds " + std::to_string(f.size()) + " descriptors, expected 1");
  RadialDescriptor d = f.entries.front().descriptor;
  return d;
}

struct MatchCmd {
  std::string query;
  std::string db_path;
  MatchOptions match;
  std::string out = "matches.csv";
  std::string curve;
  std::string curve_svg;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("match", "Rank database candidates for a query descriptor");
    sub->add_option("--query", query, "Query descriptor file")->required()->check(CLI::ExistingFile);
    sub->add_option("--db", db_path, "Database file")->required()->check(CLI::ExistingFile);
    match.add(sub);
    sub->add_option("--out", out, "Ranked results CSV")->capture_default_str();
    sub->add_option("--curve", curve, "Correlation curve CSV of the best candidate");
    sub->add_option("--curve-svg", curve_svg, "Correlation curve plot of the best candidate");
    sub->callback([this] { run(); });
  }

  void run() {
    const MatchConfig cfg = match.resolve();
    const RadialDescriptor q = read_single_descriptor(query);
    const DescriptorDatabase db = read_database(db_path);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<MatchResult> results = match_query(q, db, cfg);
    log(1, "match time: " + format_double(seconds_since(t0), 4) + " s");
    if (results.empty()) throw EmptyResultError("no candidate matched");
    const std::string header = header_for(sub);
    {
      auto f = open_output(out);
      f << header << "rank,candidate,x,y,shift,yaw_deg,score\n";
      for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        f << i + 1 << ',' << r.candidate_index << ',' << format_double(r.position.x(), 3) << ','
          << format_double(r.position.y(), 3) << ',' << r.best_shift << ',' << format_double(rad_to_deg(r.yaw), 3)
          << ',' << format_double(r.score, 9) << '\n';
      }
    }
    const auto& best = results.front();
    if (!curve.empty() || !curve_svg.empty()) {
      const std::vector<double> c = correlation_curve(db.entries[best.candidate_index].descriptor, q, cfg);
      if (!curve.empty()) {
        auto f = open_output(curve);
        write_correlation_csv(f, c, db.grid.yaw_anchor, header);
      }
      if (!curve_svg.empty()) write_text(curve_svg, correlation_svg(c, db.grid.yaw_anchor, header));
    }
    std::cout << "best: candidate " << best.candidate_index << " at (" << format_double(best.position.x(), 3) << ", "
              << format_double(best.position.y(), 3) << "), yaw " << format_double(rad_to_deg(best.yaw), 2)
              << " deg (shift " << best.best_shift << "), score " << format_double(best.score, 6) << "\n";
  }
};

struct AgreementCmd {
  std::string visual;
  std::string map;
  std::optional<int> shift;
  std::string out = "agreement.csv";
  std::string svg;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("agreement", "Per-bin hit-type agreement of a visual and a map descriptor");
    sub->add_option("--visual", visual, "Visual descriptor file")->required()->check(CLI::ExistingFile);
    sub->add_option("--map", map, "Map descriptor file")->required()->check(CLI::ExistingFile);
    sub->add_option("--shift", shift, "Alignment shift in bins (default: best hit-type shift)");
    sub->add_option("--out", out, "Agreement CSV")->capture_default_str();
    sub->add_option("--svg", svg, "Optional strip plot");
    sub->callback([this] { run(); });
  }

  void run() {
    const RadialDescriptor v = read_single_descriptor(visual);
    const RadialDescriptor m = read_single_descriptor(map);
    int s;
    if (shift) {
      s = *shift;
    } else {
      MatchConfig cfg;
      cfg.channel_mask = kHitTypeOnly;
      s = best_shift_fft(m, v, cfg).shift;
    }
    const AgreementReport r = agreement_report(v, m, s);
    const std::string header = header_for(sub) + "# applied_shift: " + std::to_string(s) + "\n";
    {
      auto f = open_output(out);
      write_agreement_csv(f, r, header);
    }
    if (!svg.empty()) write_text(svg, agreement_svg(r, header));
    std::cout << "agreement: " << format_agreement(r) << "\n";
  }
};

struct AttitudeCmd {
  std::string front_segments, back_segments, front_image, back_image;
  std::string rig_path;
  AttitudeConfig cfg;
  double tolerance_deg = 2.0;
  double cone_deg = 30.0;
  std::string out = "attitude.csv";
  std::string svg_front, svg_back;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("attitude", "Roll and pitch from vertical vanishing points");
    sub->add_option("--front-segments", front_segments, "Front camera segment CSV")->check(CLI::ExistingFile);
    sub->add_option("--back-segments", back_segments, "Back camera segment CSV")->check(CLI::ExistingFile);
    sub->add_option("--front-image", front_image, "Front camera image (segments detected)")
        ->check(CLI::ExistingFile);
    sub->add_option("--back-image", back_image, "Back camera image (segments detected)")->check(CLI::ExistingFile);
    sub->add_option("--rig", rig_path, "Rig JSON with cameras 0 and 1")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", cfg.ransac.seed, "RANSAC seed")->capture_default_str();
    sub->add_option("--iterations", cfg.ransac.iterations, "RANSAC iterations")->capture_default_str();
    sub->add_option("--tolerance-deg", tolerance_deg, "Inlier angular tolerance")->capture_default_str();
    sub->add_option("--vertical-cone-deg", cone_deg, "Vertical VP search cone")->capture_default_str();
    sub->add_option("--out", out, "Attitude CSV")->capture_default_str();
    sub->add_option("--svg-front", svg_front, "Optional sphere plot, front camera");
    sub->add_option("--svg-back", svg_back, "Optional sphere plot, back camera");
    sub->callback([this] { run(); });
  }

  static std::vector<LineSegment> load(const std::string& csv, const std::string& image) {
    if (!csv.empty()) return read_segments_csv(csv);
    if (!image.empty()) return detect_segments(read_png_gray(image));
    return {};
  }

  void run() {
    cfg.ransac.angular_tolerance = deg_to_rad(tolerance_deg);
    cfg.vertical_cone = deg_to_rad(cone_deg);
    const CameraRig rig = read_rig(rig_path);
    const auto front = load(front_segments, front_image);
    const auto back = load(back_segments, back_image);
    const DualAttitude r = estimate_attitude_dual(front, back, rig, cfg);
    const std::string header = header_for(sub);
    {
      auto f = open_output(out);
      f << header << "source,roll_deg,pitch_deg,gravity_x,gravity_y,gravity_z,inliers,vp_kind,vp_x,vp_y,vp_z\n";
      auto row = [&](const std::string& src, const std::optional<AttitudeEstimate>& e, const char* kind,
                     const VanishingPoint* vp) {
        f << src << ',';
        if (e) {
          f << format_double(rad_to_deg(e->roll), 4) << ',' << format_double(rad_to_deg(e->pitch), 4) << ','
            << format_double(e->gravity.x(), 6) << ',' << format_double(e->gravity.y(), 6) << ','
            << format_double(e->gravity.z(), 6) << ',';
        } else {
          f << ",,,,,";
        }
        f << (vp ? vp->inlier_count() : (e ? e->inlier_count : 0)) << ',' << kind << ',';
        if (vp) {
          f << format_double(vp->direction.x(), 6) << ',' << format_double(vp->direction.y(), 6) << ','
            << format_double(vp->direction.z(), 6);
        } else {
          f << ",,";
        }
        f << '\n';
      };
      row(r.fused.single_source ? "fused_single" : "fused", r.fused, "", nullptr);
      for (const auto* cam : {&r.front, &r.back}) {
        const std::string name = cam == &r.front ? "front" : "back";
        row(name, cam->estimate, "vertical", cam->vertical ? &*cam->vertical : nullptr);
        for (const auto& h : cam->horizontal) row(name, std::nullopt, "horizontal", &h);
      }
    }
    if (!svg_front.empty()) write_text(svg_front, sphere_svg(r.front, header));
    if (!svg_back.empty()) write_text(svg_back, sphere_svg(r.back, header));
    std::cout << "roll: " << format_double(rad_to_deg(r.fused.roll), 3) << " deg\npitch: "
              << format_double(rad_to_deg(r.fused.pitch), 3) << " deg\ninliers: " << r.fused.inlier_count
              << (r.fused.single_source ? " (single camera)" : "") << "\n";
  }
};

struct EvalCmd {
  SynthPlanSpec spec;
  uint64_t plan_seed = 1;
  std::string plan_in;
  RaycastOptions ray;
  double grid_step = 0.5;
  double clearance = 0.3;
  EvalConfig eval;
  MatchOptions match;
  std::string mode = "hit-type";
  std::string yaw = "binned";
  std::string out = "eval.csv";
  std::string summary;
  std::string plan_out;
  CLI::App* sub = nullptr;

  void add(CLI::App& app) {
    sub = app.add_subcommand("eval", "Localization evaluation on a synthetic plan");
    sub->add_option("--plan", plan_in, "Use this plan image instead of generating one")->check(CLI::ExistingFile);
    sub->add_option("--width", spec.width, "Building width (m)")->capture_default_str();
    sub->add_option("--height", spec.height, "Building depth (m)")->capture_default_str();
    sub->add_option("--resolution", spec.resolution, "Meters per pixel")->capture_default_str();
    sub->add_option("--depth", spec.partition_depth, "Room partition depth")->capture_default_str();
    sub->add_option("--window-fraction", spec.windows.facade_fraction, "Window length per facade length")
        ->capture_default_str();
    sub->add_option("--plan-seed", plan_seed, "Plan generator seed")->capture_default_str();
    ray.add(sub);
    sub->add_option("--grid-step", grid_step, "Candidate grid spacing (m)")->capture_default_str();
    sub->add_option("--clearance", clearance, "Minimum distance to structure (m)")->capture_default_str();
    sub->add_option("--trials", eval.trials, "Number of trials")->capture_default_str();
    sub->add_option("--seed", eval.seed, "Master seed")->capture_default_str();
    sub->add_option("--dropout", eval.noise.dropout, "Window dropout probability")->capture_default_str();
    sub->add_option("--spurious-rate", eval.noise.spurious_rate, "Spurious spans per observation")
        ->capture_default_str();
    sub->add_option("--jitter-deg", eval.noise.jitter_deg, "Per-span bearing jitter std (deg)")
        ->capture_default_str();
    sub->add_option("--dilation-bins", eval.noise.dilation_bins, "Span dilation (negative erodes)")
        ->capture_default_str();
    sub->add_option("--mode", mode, "Observation channels: hit-type or all")
        ->check(CLI::IsMember({"hit-type", "all"}))
        ->capture_default_str();
    sub->add_option("--yaw", yaw, "Yaw sampling: binned or continuous")
        ->check(CLI::IsMember({"binned", "continuous"}))
        ->capture_default_str();
    sub->add_flag("--unique-only", eval.unique_only, "Sample only poses with a unique hit-type row");
    sub->add_option("--eval-threads", eval.num_threads, "Trial worker threads")->capture_default_str();
    match.add(sub);
    sub->add_option("--out", out, "Per-trial CSV")->capture_default_str();
    sub->add_option("--summary", summary, "Optional summary text file");
    sub->add_option("--plan-out", plan_out, "Optional PNG of the evaluated plan");
    sub->callback([this] { run(); });
  }

  void run() {
    const FloorPlanRaster raster =
        plan_in.empty() ? generate_plan(spec, plan_seed) : load_floorplan(plan_in, read_plan_metadata(default_metadata_path(plan_in)));
    if (!plan_out.empty()) {
      const std::string p = output_path(plan_out);
      save_floorplan(raster, p, default_metadata_path(p));
    }
    BuildOptions opts;
    opts.grid_step = grid_step;
    opts.free_space = clearance_predicate(clearance);
    opts.num_threads = eval.num_threads;
    const DescriptorDatabase db = build_database(raster, opts, ray.cfg);
    eval.match = match.resolve();
    eval.mode = mode == "all" ? ObservationMode::kAllChannels : ObservationMode::kHitTypeOnly;
    eval.yaw_sampling = yaw == "continuous" ? YawSampling::kContinuous : YawSampling::kBinned;
    const EvalReport report = run_localization_eval(raster, db, eval);
    const std::string header = header_for(sub) + "# candidates: " + std::to_string(db.size()) + "\n";
    {
      auto f = open_output(out);
      write_eval_csv(f, report, header);
    }
    std::ostringstream text;
    write_eval_summary(text, report.summary);
    std::cout << text.str();
    if (!summary.empty()) write_text(summary, header + text.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compass: floor-plan localization toolkit"};
  app.set_version_flag("--version", std::string("compass ") + COMPASS_VERSION);
  app.require_subcommand(1);
  if (const char* env = std::getenv("COMPASS_OUTPUT_DIR")) g_globals.output_dir = env;
  app.add_option("--output-dir", g_globals.output_dir, "Directory for relative output paths (env COMPASS_OUTPUT_DIR)");
  app.add_flag("-v,--verbose", g_globals.verbosity, "Verbose diagnostics on stderr");

  GenPlanCmd gen_plan;
  BuildDbCmd build_db;
  DescribeCmd describe;
  DetectWindowsCmd detect;
  VisualDescriptorCmd visual;
  MatchCmd match;
  AgreementCmd agreement;
  AttitudeCmd attitude;
  EvalCmd eval;
  gen_plan.add(app);
  build_db.add(app);
  describe.add(app);
  detect.add(app);
  visual.add(app);
  match.add(app);
  agreement.add(app);
  attitude.add(app);
  eval.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const EmptyResultError& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const IoError& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
