#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fovholo/cli.hpp"
#include "fovholo/imageio.hpp"
#include "fovholo/slm.hpp"
#include "support/corpus.hpp"

using namespace fovholo;
using namespace fovholo::testsupport;

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fovholo_tests" / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string cli_binary() {
  const char* env = std::getenv("FOVHOLO_CLI");
  return env ? env : "";
}

struct CliResult {
  int exit_code = -1;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const fs::path errfile = work_dir() / "stderr.txt";
  const std::string cmd = cli_binary() + " " + args + " 2>" + errfile.string() + " >/dev/null";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(rc);
  std::ifstream in(errfile);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string write_target(const std::string& name, int size, int channels) {
  const fs::path path = work_dir() / name;
  save_image_png(path.string(), corpus_image(0, size, channels), 8, true);
  return path.string();
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

const std::string kFast = " --steps 4 --quiet --ppd 8 ";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("binary is configured") {
  REQUIRE_MESSAGE(!cli_binary().empty(), "FOVHOLO_CLI env var must point at the binary");
}

TEST_CASE("optimise writes all artifact kinds and is seed-deterministic") {
  const std::string target = write_target("t32.png", 32, 1);
  const fs::path out1 = work_dir() / "opt1";
  const fs::path out2 = work_dir() / "opt2";

  CliResult r1 = run_cli("optimise --target " + target + kFast + "--seed 7 --out " + out1.string());
  CHECK(r1.exit_code == 0);
  for (const char* f : {"phase_c0.png", "phase.json", "reconstruction.png",
                        "reconstruction.f32", "history.tsv", "manifest.json"})
    CHECK_MESSAGE(fs::exists(out1 / f), f);

  // history has a header plus one row per iteration
  std::ifstream hist(out1 / "history.tsv");
  int lines = 0;
  std::string line;
  while (std::getline(hist, line)) ++lines;
  CHECK(lines == 5);

  CliResult r2 = run_cli("optimise --target " + target + kFast + "--seed 7 --out " + out2.string());
  CHECK(r2.exit_code == 0);
  CHECK(file_bytes(out1 / "phase_c0.png") == file_bytes(out2 / "phase_c0.png"));
}

TEST_CASE("missing target fails with an I/O error naming the path") {
  CliResult r = run_cli("optimise --target /nonexistent/t.png --out " +
                        (work_dir() / "optx").string());
  CHECK(r.exit_code == kExitIo);
  CHECK(r.err.find("/nonexistent/t.png") != std::string::npos);
}

TEST_CASE("bad loss name is a config error") {
  const std::string target = write_target("t32b.png", 32, 1);
  CliResult r = run_cli("optimise --target " + target + " --loss bogus --out " +
                        (work_dir() / "opty").string());
  CHECK(r.exit_code == kExitConfig);
}

TEST_CASE("simulate reconstructs from exported phases") {
  const std::string target = write_target("t32c.png", 32, 1);
  const fs::path opt = work_dir() / "opt_sim";
  REQUIRE(run_cli("optimise --target " + target + kFast + "--seed 3 --out " + opt.string())
              .exit_code == 0);

  const fs::path sim1 = work_dir() / "sim1";
  CliResult r = run_cli("simulate --phase " + (opt / "phase").string() + " --out " + sim1.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(sim1 / "reconstruction.png"));
  CHECK(fs::exists(sim1 / "reconstruction.f32"));

  SUBCASE("distance override equal to the sidecar changes nothing") {
    const fs::path sim2 = work_dir() / "sim2";
    // default distance is 0.15 m, which is what optimise wrote to the sidecar
    CliResult r2 = run_cli("simulate --phase " + (opt / "phase").string() +
                           " --distance 0.15 --out " + sim2.string());
    CHECK(r2.exit_code == 0);
    CHECK(file_bytes(sim1 / "reconstruction.f32") == file_bytes(sim2 / "reconstruction.f32"));
  }

  SUBCASE("corrupt sidecar is a format error") {
    const fs::path broken = work_dir() / "broken";
    fs::create_directories(broken);
    fs::copy_file(opt / "phase_c0.png", broken / "phase_c0.png");
    std::ofstream(broken / "phase.json") << "{ nope";
    CliResult r3 = run_cli("simulate --phase " + (broken / "phase").string() + " --out " +
                           (work_dir() / "sim3").string());
    CHECK(r3.exit_code == kExitIo);
  }

  SUBCASE("wavelengths conflicting with the sidecar are a config error") {
    const fs::path cfg_path = work_dir() / "wl.json";
    std::ofstream(cfg_path) << R"({"propagation": {"wavelengths_m": [4.5e-7]}})";
    CliResult r4 = run_cli("simulate --config " + cfg_path.string() + " --phase " +
                           (opt / "phase").string() + " --out " +
                           (work_dir() / "sim4").string());
    CHECK(r4.exit_code == kExitConfig);
    CHECK(r4.err.find("conflict") != std::string::npos);
  }
}

TEST_CASE("compare emits one row per loss and inset crops") {
  const std::string target = write_target("t48.png", 48, 1);
  const fs::path out = work_dir() / "cmp";
  CliResult r = run_cli("compare --target " + target + kFast +
                        "--losses mse,metameric --seed 5 --out " + out.string());
  CHECK(r.exit_code == 0);
  std::ifstream report(out / "report.tsv");
  std::string line;
  std::getline(report, line);
  CHECK(line == "loss\tmse\tfoveal_mse\tperipheral_mse\tmetameric");
  int rows = 0;
  while (std::getline(report, line)) ++rows;
  CHECK(rows == 2);
  for (const char* f : {"mse_fovea.png", "mse_periphery.png", "metameric_fovea.png",
                        "metameric_periphery.png", "manifest.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  SUBCASE("default runs all five losses") {
    const fs::path out5 = work_dir() / "cmp5";
    CliResult r5 = run_cli("compare --target " + target + kFast + "--seed 5 --out " +
                           out5.string());
    CHECK(r5.exit_code == 0);
    std::ifstream rep(out5 / "report.tsv");
    int lines = 0;
    std::string l;
    while (std::getline(rep, l)) ++lines;
    CHECK(lines == 6);  // header + five rows
  }

  SUBCASE("custom peripheral inset window") {
    const fs::path outw = work_dir() / "cmpw";
    CliResult rw = run_cli("compare --target " + target + kFast +
                           "--losses mse --inset 2,2,8,8 --seed 5 --out " + outw.string());
    CHECK(rw.exit_code == 0);
    CHECK(fs::exists(outw / "mse_periphery.png"));
  }
}

TEST_CASE("metamer writes composite and reports the loss ratio") {
  const std::string target = write_target("t64.png", 64, 1);
  const fs::path out = work_dir() / "met";
  CliResult r = run_cli("metamer --target " + target + " --quiet --ppd 8 --seed 2 --out " +
                        out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "metamer.png"));
  CHECK(fs::exists(out / "composite.png"));
  std::ifstream manifest(out / "manifest.json");
  std::stringstream ss;
  ss << manifest.rdbuf();
  CHECK(ss.str().find("\"metameric_loss\"") != std::string::npos);
  CHECK(ss.str().find("\"below_acceptance_ratio\": true") != std::string::npos);
}

TEST_CASE("average with count 1 equals the single frame") {
  const std::string target = write_target("t32d.png", 32, 1);
  const fs::path out = work_dir() / "avg1";
  CliResult r = run_cli("average --target " + target + kFast + "--count 1 --seed 4 --out " +
                        out.string());
  CHECK(r.exit_code == 0);
  CHECK(file_bytes(out / "single_frame.f32") == file_bytes(out / "average.f32"));
  CHECK(fs::exists(out / "metrics.tsv"));
  CHECK(fs::exists(out / "phase_f0.json"));
}

TEST_CASE("encode toggles the grating losslessly") {
  const std::string target = write_target("t32e.png", 32, 1);
  const fs::path opt = work_dir() / "opt_enc";
  REQUIRE(run_cli("optimise --target " + target + kFast + "--out " + opt.string()).exit_code == 0);

  const fs::path enc = work_dir() / "enc";
  CliResult r = run_cli("encode --phase " + (opt / "phase").string() +
                        " --grating horizontal --out " + enc.string());
  CHECK(r.exit_code == 0);
  ImportedPhase grated = import_phase((enc / "phase").string());
  CHECK(grated.meta.grating == "horizontal");

  // toggling back restores the original codes exactly (pi is 128 codes)
  const fs::path undo = work_dir() / "enc_undo";
  CliResult r2 = run_cli("encode --phase " + (enc / "phase").string() +
                         " --grating none --out " + undo.string());
  CHECK(r2.exit_code == 0);
  ImportedPhase original = import_phase((opt / "phase").string());
  ImportedPhase restored = import_phase((undo / "phase").string());
  CHECK(restored.meta.grating == "none");
  CHECK(restored.quantized.channels[0] == original.quantized.channels[0]);
}

TEST_CASE("config file is honored and flags override it") {
  const std::string target = write_target("t32f.png", 32, 1);
  const fs::path cfg_path = work_dir() / "cfg.json";
  std::ofstream(cfg_path) << R"({"optim": {"steps": 2, "seed": 9}, "io": {"out": ")"
                          << (work_dir() / "cfgout").string() << R"("}})";
  CliResult r = run_cli("optimise --config " + cfg_path.string() + " --target " + target +
                        " --steps 3 --quiet --ppd 8");
  CHECK(r.exit_code == 0);
  std::ifstream manifest(work_dir() / "cfgout" / "manifest.json");
  std::stringstream ss;
  ss << manifest.rdbuf();
  CHECK(ss.str().find("\"steps\": 3") != std::string::npos);
  CHECK(ss.str().find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("slm size mismatch needs --resize") {
  const std::string target = write_target("t32g.png", 32, 1);
  CliResult r = run_cli("optimise --target " + target + kFast +
                        "--slm-width 24 --slm-height 24 --out " +
                        (work_dir() / "mismatch").string());
  CHECK(r.exit_code == kExitConfig);

  const fs::path out = work_dir() / "resized";
  CliResult r2 = run_cli("optimise --target " + target + kFast +
                         "--slm-width 24 --slm-height 24 --resize --out " + out.string());
  CHECK(r2.exit_code == 0);
  int w = 0, h = 0;
  load_gray8_png((out / "phase_c0.png").string(), &w, &h);
  CHECK(w == 24);
  CHECK(h == 24);
}

TEST_CASE("gaze presets and rgb targets") {
  const std::string target = write_target("t32rgb.png", 32, 3);
  const fs::path out = work_dir() / "rgb";
  CliResult r = run_cli("optimise --target " + target + kFast + "--gaze center --out " +
                        out.string());
  CHECK(r.exit_code == 0);
  for (const char* f : {"phase_c0.png", "phase_c1.png", "phase_c2.png"})
    CHECK(fs::exists(out / f));
}

}  // TEST_SUITE
