#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "compass/csv_io.h"
#include "compass/fisheye.h"
#include "compass/image.h"
#include "compass/synth_images.h"
#include "test_util.h"

namespace compass {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI inside `dir` with the given arguments and optional environment
// prefix.
RunResult run_cli(const testing::TempDir& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + dir.path().string() + "' && " + env + " '" COMPASS_CLI_PATH "' " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir.file("cli_stdout.txt"));
  r.err = slurp(dir.file("cli_stderr.txt"));
  return r;
}

// First data line after the header of a CSV with the given column line.
std::vector<std::string> first_row(const std::string& text, const std::string& columns) {
  const size_t at = text.find(columns + "\n");
  if (at == std::string::npos) return {};
  std::istringstream line(text.substr(at + columns.size() + 1));
  std::string row;
  std::getline(line, row);
  std::vector<std::string> cells;
  std::istringstream cs(row);
  std::string cell;
  while (std::getline(cs, cell, ',')) cells.push_back(cell);
  return cells;
}

TEST(Cli, HelpAndVersion) {
  testing::TempDir dir("cli_help");
  EXPECT_EQ(run_cli(dir, "--help").code, 0);
  for (const char* sub : {"gen-plan", "build-db", "describe", "detect-windows", "visual-descriptor", "match",
                          "agreement", "attitude", "eval"}) {
    const RunResult r = run_cli(dir, std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--out"), std::string::npos) << sub;
  }
  const RunResult v = run_cli(dir, "--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("compass 0.1.0"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  testing::TempDir dir("cli_usage");
  EXPECT_EQ(run_cli(dir, "").code, 1);
  EXPECT_EQ(run_cli(dir, "frobnicate").code, 1);
  EXPECT_EQ(run_cli(dir, "describe --x 1").code, 1);
  EXPECT_EQ(run_cli(dir, "build-db --plan missing.png").code, 1);
  ASSERT_EQ(run_cli(dir, "gen-plan --width 8 --height 6").code, 0);
  const RunResult r = run_cli(dir, "build-db --plan plan.png --grid-step 0");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("grid_step"), std::string::npos);
}

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(run_cli(dir_, "gen-plan --width 12 --height 9 --seed 3").code, 0);
    ASSERT_TRUE(std::filesystem::exists(dir_.file("plan.png")));
    ASSERT_TRUE(std::filesystem::exists(dir_.file("plan.json")));
    ASSERT_EQ(run_cli(dir_, "build-db --plan plan.png --grid-step 1").code, 0);
    ASSERT_TRUE(std::filesystem::exists(dir_.file("db.bin")));
  }

  testing::TempDir dir_{"cli_pipe"};
};

TEST_F(CliPipeline, DescribeAndMatchRecoverPose) {
  RunResult r = run_cli(dir_, "describe --plan plan.png --x 4.5 --y 3.5 --yaw-deg 30 --out q.bin --stats q.txt "
                              "--svg q.svg");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("window bins: "), std::string::npos);
  EXPECT_EQ(slurp(dir_.file("q.txt")), r.out);
  EXPECT_EQ(slurp(dir_.file("q.svg")).rfind("<?xml", 0), 0u);

  r = run_cli(dir_, "match --query q.bin --db db.bin --curve curve.csv --curve-svg curve.svg");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("at (4.500, 3.500), yaw 30.00 deg (shift 30)"), std::string::npos) << r.out;
  const std::string csv = slurp(dir_.file("matches.csv"));
  EXPECT_EQ(csv.rfind("# compass 0.1.0 match\n", 0), 0u);
  EXPECT_NE(csv.find("# query: \"q.bin\"\n"), std::string::npos);
  EXPECT_EQ(csv.find("# out:"), std::string::npos);
  EXPECT_EQ(csv.find("# curve:"), std::string::npos);
  const auto best = first_row(csv, "rank,candidate,x,y,shift,yaw_deg,score");
  ASSERT_EQ(best.size(), 7u);
  EXPECT_EQ(best[2], "4.500");
  EXPECT_EQ(best[3], "3.500");
  EXPECT_EQ(best[4], "30");
  EXPECT_EQ(best[6], "1.000000000");
  EXPECT_NE(slurp(dir_.file("curve.csv")).find("# peak_shift: 30\n"), std::string::npos);

  r = run_cli(dir_, "agreement --visual q.bin --map q.bin");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("360 out of 360 bins (100%)"), std::string::npos);
  EXPECT_NE(slurp(dir_.file("agreement.csv")).find("bin,azimuth_deg,camera,map,agree\n"), std::string::npos);
}

TEST_F(CliPipeline, OutputDirectoryFromFlagAndEnvironment) {
  ASSERT_EQ(run_cli(dir_, "--output-dir flagged describe --plan plan.png --x 4.5 --y 3.5").code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir_.file("flagged/descriptor.bin")));
  ASSERT_EQ(run_cli(dir_, "describe --plan plan.png --x 4.5 --y 3.5", "COMPASS_OUTPUT_DIR=envdir").code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir_.file("envdir/descriptor.bin")));
  // Same inputs give byte-identical outputs wherever they are written.
  EXPECT_EQ(slurp(dir_.file("flagged/descriptor.bin")), slurp(dir_.file("envdir/descriptor.bin")));
}

TEST_F(CliPipeline, ErrorExitCodes) {
  {
    std::ofstream f(dir_.file("bad.bin"));
    f << "garbage";
  }
  ASSERT_EQ(run_cli(dir_, "describe --plan plan.png --x 4.5 --y 3.5 --out q.bin").code, 0);
  RunResult r = run_cli(dir_, "match --query q.bin --db bad.bin");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("bad.bin"), std::string::npos);
  // An all-wall query passes no transition-count prefilter on this plan.
  ASSERT_EQ(run_cli(dir_, "gen-plan --width 12 --height 9 --seed 3 --window-fraction 0 --out blank.png").code, 0);
  ASSERT_EQ(run_cli(dir_, "describe --plan blank.png --x 4.5 --y 3.5 --out blank.bin").code, 0);
  r = run_cli(dir_, "match --query blank.bin --db db.bin --hit-type-only --prefilter 0");
  EXPECT_EQ(r.code, 2) << r.out << r.err;
  EXPECT_EQ(run_cli(dir_, "eval --width 12 --height 9 --window-fraction 0 --unique-only --trials 3").code, 2);
}

TEST(Cli, WindowsToVisualDescriptor) {
  testing::TempDir dir("cli_windows");
  const WindowScene scene = generate_window_scene({}, 4);
  write_png(dir.file("front.png"), scene.color);
  CameraRig rig = make_dual_rig(default_test_camera());
  rig.cameras[0].model.width = scene.gray.width;
  rig.cameras[0].model.height = scene.gray.height;
  write_rig(dir.file("rig.json"), rig);

  RunResult r = run_cli(dir, "detect-windows --image front.png --segments-out segs.csv --svg overlay.svg");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dets = read_detections_csv(dir.file("detections.csv"));
  const DetectionScore s = score_detections(scene.windows, dets);
  EXPECT_GE(s.true_positives, 1);
  EXPECT_FALSE(read_segments_csv(dir.file("segs.csv")).empty());

  // Reusing the exported segments reproduces the detections.
  r = run_cli(dir, "detect-windows --image front.png --segments segs.csv --out again.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto again = read_detections_csv(dir.file("again.csv"));
  ASSERT_EQ(again.size(), dets.size());
  for (size_t i = 0; i < dets.size(); ++i) EXPECT_NEAR(again[i].box.x, dets[i].box.x, 1e-6);

  r = run_cli(dir, "visual-descriptor --detections detections.csv --rig rig.json --bins 360");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("detections: " + std::to_string(dets.size())), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir.file("visual.bin")));
}

TEST(Cli, AttitudeFromSegmentFiles) {
  testing::TempDir dir("cli_attitude");
  const CameraRig rig = make_dual_rig(default_test_camera());
  write_rig(dir.file("rig.json"), rig);
  LineSceneSpec front;
  front.camera = default_test_camera();
  front.roll = deg_to_rad(3.0);
  front.pitch = deg_to_rad(-6.0);
  front.pixel_noise = 0.3;
  LineSceneSpec back = front;
  back.roll = -front.roll;
  back.pitch = -front.pitch;
  {
    std::ofstream f(dir.file("front.csv"));
    write_segments_csv(f, generate_line_scene(front, 1).segments, "");
  }
  {
    std::ofstream f(dir.file("back.csv"));
    write_segments_csv(f, generate_line_scene(back, 2).segments, "");
  }
  RunResult r = run_cli(dir, "attitude --rig rig.json --front-segments front.csv --back-segments back.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fused = first_row(slurp(dir.file("attitude.csv")),
                               "source,roll_deg,pitch_deg,gravity_x,gravity_y,gravity_z,inliers,vp_kind,vp_x,vp_y,vp_z");
  ASSERT_GE(fused.size(), 3u);
  EXPECT_EQ(fused[0], "fused");
  EXPECT_NEAR(std::stod(fused[1]), 3.0, 0.5);
  EXPECT_NEAR(std::stod(fused[2]), -6.0, 0.5);

  {
    std::ofstream f(dir.file("empty.csv"));
    write_segments_csv(f, {}, "");
  }
  EXPECT_EQ(run_cli(dir, "attitude --rig rig.json --front-segments empty.csv").code, 2);
}

TEST(Cli, EvalMatchesGoldenOutput) {
  testing::TempDir dir("cli_golden");
  const RunResult r = run_cli(dir,
                              "eval --width 12 --height 9 --grid-step 1 --trials 20 --seed 11 --dropout 0.2 "
                              "--jitter-deg 1 --spurious-rate 0.5 --out golden_eval.csv --summary summary.txt");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir.file("golden_eval.csv")), slurp(COMPASS_TEST_DATA_DIR "/golden_eval.csv"));
  EXPECT_NE(r.out.find("rank-1 rate: "), std::string::npos);
  EXPECT_EQ(slurp(dir.file("summary.txt")).find("# compass 0.1.0 eval\n"), 0u);
}

}  // namespace
}  // namespace compass
