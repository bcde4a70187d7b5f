#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + (env.empty() ? "" : " ") + LRD_CLI_PATH + " " + args + " 2>&1";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe))
    res.output.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lrd_cli_" + std::to_string(std::chrono::steady_clock::now()
                                            .time_since_epoch()
                                            .count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Extracts the mean-error cell from a table row like "rasl | 0.1 | 0.2 | 0.3".
double mean_error_of(const std::string& table, const std::string& row) {
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(row + " | ", 0) != 0) continue;
    const auto a = line.find(" | ");
    const auto b = line.find(" | ", a + 3);
    return std::stod(line.substr(a + 3, b - a - 3));
  }
  FAIL("row '" << row << "' not found in table:\n" << table);
  return 0.0;
}

std::string synth_args(const fs::path& out) {
  return "synth --out " + out.string() +
         " --base face --height 32 --width 32 --count 10 --shift 1.5 "
         "--seed 42";
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("unknown-command").exit_code == 2);
  CHECK(run_cli("synth --out /tmp/x").exit_code == 2);  // missing --seed
  CHECK(run_cli("decompose --out /tmp/x").exit_code == 2);
  CHECK(run_cli("synth --out /tmp/x --seed 1 --base nonsense").exit_code == 2);
  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("synth") != std::string::npos);
  CHECK(help.output.find("decompose") != std::string::npos);
}

TEST_CASE("runtime failures exit with code 1") {
  TempDir dir;
  const RunResult missing = run_cli(
      "decompose --input " + (dir.path / "absent").string() + " --out " +
      (dir.path / "run").string());
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("error:") != std::string::npos);
  const RunResult bad_eval = run_cli(
      "eval --result " + (dir.path / "absent").string() + " --data " +
      dir.path.string());
  CHECK(bad_eval.exit_code == 1);
}

TEST_CASE("synth writes a reproducible dataset") {
  TempDir dir;
  const fs::path a = dir.path / "a";
  const fs::path b = dir.path / "b";
  REQUIRE(run_cli(synth_args(a)).exit_code == 0);
  REQUIRE(run_cli(synth_args(b)).exit_code == 0);
  for (const char* name : {"image_000.png", "image_009.png", "landmarks.txt",
                           "truth.txt", "manifest.txt"}) {
    CHECK(fs::exists(a / name));
  }
  CHECK_FALSE(fs::exists(a / "image_010.png"));
  CHECK(read_file(a / "image_000.png") == read_file(b / "image_000.png"));
  CHECK(read_file(a / "image_009.png") == read_file(b / "image_009.png"));
  CHECK(read_file(a / "truth.txt") == read_file(b / "truth.txt"));
  CHECK(read_file(a / "landmarks.txt") == read_file(b / "landmarks.txt"));
}

TEST_CASE("the synth, decompose, eval pipeline improves alignment") {
  TempDir dir;
  const fs::path data = dir.path / "data";
  const fs::path run = dir.path / "run";
  REQUIRE(run_cli(synth_args(data)).exit_code == 0);

  const RunResult dec = run_cli(
      "decompose --input " + data.string() + " --out " + run.string() +
      " --method rasl --transform translation --mu-schedule growth",
      "LRD_LOG=error");
  INFO(dec.output);
  REQUIRE(dec.exit_code == 0);
  CHECK(dec.output.find("objective = ") != std::string::npos);
  CHECK(dec.output.find("Method | Mean error (pixel) | Error std. | Max error") !=
        std::string::npos);
  for (const char* name :
       {"lowrank.lrdm", "sparse.lrdm", "result.txt", "trace.txt",
        "manifest.txt", "montage_input.png", "montage_aligned.png",
        "montage_lowrank.png", "montage_sparse.png"})
    CHECK(fs::exists(run / name));

  const RunResult ev = run_cli("eval --result " + run.string() + " --data " +
                               data.string());
  INFO(ev.output);
  REQUIRE(ev.exit_code == 0);
  CHECK(fs::exists(run / "eval.txt"));
  CHECK(ev.output.find("Initial | ") != std::string::npos);
  CHECK(ev.output.find("rasl | ") != std::string::npos);
  const double initial = mean_error_of(ev.output, "Initial");
  const double aligned = mean_error_of(ev.output, "rasl");
  CHECK(initial > 0.3);  // the dataset really is misaligned
  CHECK(aligned < 0.5 * initial);
  CHECK(ev.output == read_file(run / "eval.txt"));
}

TEST_CASE("trace verbosity follows LRD_LOG") {
  TempDir dir;
  const fs::path data = dir.path / "data";
  REQUIRE(run_cli(synth_args(data)).exit_code == 0);
  const std::string base_args =
      "decompose --input " + data.string() + " --method rasl "
      "--transform translation --mu-schedule growth --max-outer 2 --out ";
  const RunResult quiet =
      run_cli(base_args + (dir.path / "q").string(), "LRD_LOG=error");
  REQUIRE(quiet.exit_code == 0);
  CHECK(quiet.output.find("record=") == std::string::npos);
  const RunResult loud =
      run_cli(base_args + (dir.path / "l").string(), "LRD_LOG=debug");
  REQUIRE(loud.exit_code == 0);
  CHECK(loud.output.find("record=inner") != std::string::npos);
  CHECK(loud.output.find("record=outer") != std::string::npos);
  // The trace file holds every record regardless of verbosity.
  const std::string trace = read_file(dir.path / "q" / "trace.txt");
  CHECK(trace.find("record=inner") != std::string::npos);
  CHECK(trace.find("record=outer") != std::string::npos);
}

TEST_CASE("manifold runs add a manifold trace section") {
  TempDir dir;
  const fs::path data = dir.path / "data";
  REQUIRE(run_cli(synth_args(data)).exit_code == 0);
  const std::string common =
      "decompose --input " + data.string() + " --transform translation "
      "--mu-schedule growth --max-outer 2 --out ";
  REQUIRE(run_cli(common + (dir.path / "r").string() + " --method rasl",
                  "LRD_LOG=error")
              .exit_code == 0);
  REQUIRE(run_cli(common + (dir.path / "m").string() + " --method meadmm",
                  "LRD_LOG=error")
              .exit_code == 0);
  CHECK(read_file(dir.path / "r" / "trace.txt").find("record=manifold") ==
        std::string::npos);
  CHECK(read_file(dir.path / "m" / "trace.txt").find("record=manifold") !=
        std::string::npos);
}

TEST_CASE("compare runs both methods deterministically") {
  TempDir dir;
  const fs::path data = dir.path / "data";
  REQUIRE(run_cli(synth_args(data)).exit_code == 0);
  const std::string args =
      "compare --input " + data.string() + " --transform translation "
      "--mu-schedule growth --seed 5 --out ";
  const RunResult a =
      run_cli(args + (dir.path / "out1").string(), "LRD_LOG=error");
  INFO(a.output);
  REQUIRE(a.exit_code == 0);
  CHECK(a.output.find("Method | Mean error (pixel) | Error std. | Max error") !=
        std::string::npos);
  CHECK(a.output.find("rasl_ms = ") != std::string::npos);
  CHECK(a.output.find("meadmm_ms = ") != std::string::npos);
  for (const char* name :
       {"rasl/result.txt", "meadmm/result.txt", "rasl/lowrank.lrdm",
        "meadmm/lowrank.lrdm", "compare.txt", "montage_compare.png"})
    CHECK(fs::exists(dir.path / "out1" / name));

  const RunResult b =
      run_cli(args + (dir.path / "out2").string(), "LRD_LOG=error");
  REQUIRE(b.exit_code == 0);
  for (const char* name :
       {"rasl/lowrank.lrdm", "rasl/sparse.lrdm", "meadmm/lowrank.lrdm",
        "meadmm/sparse.lrdm", "rasl/result.txt", "meadmm/result.txt"})
    CHECK(read_file(dir.path / "out1" / name) ==
          read_file(dir.path / "out2" / name));
}

TEST_CASE("flags beat config file values which beat defaults") {
  TempDir dir;
  const fs::path cfg = dir.path / "synth.cfg";
  std::ofstream(cfg) << "count = 6\nshift = 0.5\nseed = 11\n";
  const fs::path out = dir.path / "data";
  const RunResult res = run_cli("synth --config " + cfg.string() + " --out " +
                                out.string() + " --count 4");
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  // --count 4 beats the config's 6; shift and seed come from the config.
  CHECK(fs::exists(out / "image_003.png"));
  CHECK_FALSE(fs::exists(out / "image_004.png"));
  const std::string manifest = read_file(out / "manifest.txt");
  CHECK(manifest.find("count = 4") != std::string::npos);
  CHECK(manifest.find("shift = 0.5") != std::string::npos);
  CHECK(manifest.find("seed = 11") != std::string::npos);
}
