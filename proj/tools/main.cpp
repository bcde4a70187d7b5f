#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "lrd/lrd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level_from_env() {
  const char* v = std::getenv("LRD_LOG");
  if (v == nullptr) return LogLevel::Info;
  const std::string s(v);
  if (s == "error") return LogLevel::Error;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

std::string timestamp_utc() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_manifest(const fs::path& path,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw lrd::IoError("write_manifest: cannot write " + path.string());
  out << "lrd-manifest 1\n";
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
  if (!out) throw lrd::IoError("write_manifest: write failed");
}

/// Reads "key = value" lines back from a manifest; returns "" when absent.
std::string manifest_value(const fs::path& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) return "";
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos && line.substr(0, eq) == key)
      return line.substr(eq + 3);
  }
  return "";
}

/// Writes solver trace records to a file and echoes them to standard error
/// according to the LRD_LOG level.
class TraceLogger {
 public:
  TraceLogger(const fs::path& path, LogLevel level, bool manifold_sections)
      : out_(path), level_(level), manifold_(manifold_sections) {
    if (!out_) throw lrd::IoError("trace: cannot write " + path.string());
  }

  lrd::TraceSink sink() {
    return [this](const lrd::TraceRecord& r) { record(r); };
  }

 private:
  void record(const lrd::TraceRecord& r) {
    char buf[256];
    if (r.outer_summary) {
      std::snprintf(buf, sizeof(buf),
                    "record=outer outer=%d iterations=%d objective=%.10g "
                    "mu=%.10g max_param_change=%.10g",
                    r.outer, r.inner, r.objective, r.mu, r.max_param_change);
      emit(buf, LogLevel::Info);
      if (manifold_ && r.manifold_dim >= 0) {
        std::snprintf(buf, sizeof(buf), "record=manifold outer=%d dim=%d",
                      r.outer, r.manifold_dim);
        emit(buf, LogLevel::Info);
      }
    } else {
      std::snprintf(buf, sizeof(buf),
                    "record=inner outer=%d inner=%d residual=%.10g "
                    "objective=%.10g mu=%.10g rank=%d",
                    r.outer, r.inner, r.residual, r.objective, r.mu, r.rank);
      emit(buf, LogLevel::Debug);
    }
  }

  void emit(const char* line, LogLevel min_level) {
    out_ << line << "\n";
    if (static_cast<int>(level_) >= static_cast<int>(min_level))
      std::cerr << line << "\n";
  }

  std::ofstream out_;
  LogLevel level_;
  bool manifold_;
};

struct ErrorRow {
  std::string name;
  lrd::AlignmentReport report;
};

std::string format_error_table(const std::vector<ErrorRow>& rows) {
  std::string s = "Method | Mean error (pixel) | Error std. | Max error\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s | %.6f | %.6f | %.6f\n",
                  row.name.c_str(), row.report.mean_error,
                  row.report.error_std, row.report.max_error);
    s += buf;
  }
  return s;
}

/// Options shared by the decompose and compare commands.
struct SolverOptions {
  std::string method = "rasl";
  std::string transform = "similarity";
  double lambda = 0.0;
  int k = 7;
  double alpha = 0.05;
  double epsilon_prime = 0.85;
  std::string mu_schedule = "decay";
  double mu0 = 0.0;
  double mu_floor = 0.0;
  double mu_cap = 0.0;
  double mu_decay = 0.9;
  double mu_growth = 1.5;
  double inner_tol = 1e-7;
  double tol = 1e-5;
  int max_inner = 200;
  int max_outer = 50;
  std::string project_target = "vm-lin";
  bool freeze_manifold = true;
  int height = 0;
  int width = 0;
  std::uint64_t seed = 0;

  lrd::SolverConfig config() const {
    lrd::SolverConfig cfg;
    cfg.method = lrd::method_from_name(method);
    cfg.lambda = lambda;
    cfg.manifold.k = k;
    cfg.manifold.alpha = alpha;
    cfg.manifold.epsilon_prime = epsilon_prime;
    cfg.mu_schedule = mu_schedule == "growth" ? lrd::MuSchedule::Growth
                                              : lrd::MuSchedule::Decay;
    cfg.mu0 = mu0;
    cfg.mu_floor = mu_floor;
    cfg.mu_cap = mu_cap;
    cfg.mu_decay = mu_decay;
    cfg.mu_growth = mu_growth;
    cfg.inner_tol = inner_tol;
    cfg.outer_tol = tol;
    cfg.inner_max_iters = max_inner;
    cfg.outer_max_iters = max_outer;
    cfg.project_target = project_target == "vm-lin"
                             ? lrd::ProjectTarget::VmLin
                             : lrd::ProjectTarget::VrPlusE;
    cfg.freeze_manifold_per_outer = freeze_manifold;
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> manifest_entries() const {
    return {{"method", method},
            {"transform", transform},
            {"lambda", num(lambda)},
            {"k", std::to_string(k)},
            {"alpha", num(alpha)},
            {"epsilon_prime", num(epsilon_prime)},
            {"mu_schedule", mu_schedule},
            {"mu0", num(mu0)},
            {"mu_floor", num(mu_floor)},
            {"mu_cap", num(mu_cap)},
            {"mu_decay", num(mu_decay)},
            {"mu_growth", num(mu_growth)},
            {"inner_tol", num(inner_tol)},
            {"tol", num(tol)},
            {"max_inner", std::to_string(max_inner)},
            {"max_outer", std::to_string(max_outer)},
            {"project_target", project_target},
            {"freeze_manifold", freeze_manifold ? "1" : "0"},
            {"height", std::to_string(height)},
            {"width", std::to_string(width)},
            {"seed", std::to_string(seed)}};
  }
};

void add_solver_flags(CLI::App* cmd, SolverOptions& o, bool with_method) {
  if (with_method)
    cmd->add_option("--method", o.method, "Solver variant")
        ->check(CLI::IsMember({"rasl", "meadmm"}));
  cmd->add_option("--transform", o.transform, "Transform group")
      ->check(CLI::IsMember(
          {"translation", "similarity", "affine", "projective"}));
  cmd->add_option("--lambda", o.lambda,
                  "Sparsity weight; 0 means 1/sqrt(max dimension)");
  cmd->add_option("--k", o.k, "Neighbor count for the manifold model");
  cmd->add_option("--alpha", o.alpha, "Manifold shrinkage threshold");
  cmd->add_option("--epsilon-prime", o.epsilon_prime,
                  "Manifold reconstruction-error scale in [0, 1]");
  cmd->add_option("--mu-schedule", o.mu_schedule,
                  "Penalty update rule: decay shrinks mu each iteration, "
                  "growth increases it")
      ->check(CLI::IsMember({"decay", "growth"}));
  cmd->add_option("--mu0", o.mu0, "Initial penalty; 0 means automatic");
  cmd->add_option("--mu-floor", o.mu_floor,
                  "Lower bound under the decay schedule; 0 means automatic");
  cmd->add_option("--mu-cap", o.mu_cap,
                  "Upper bound under the growth schedule; 0 means automatic");
  cmd->add_option("--mu-decay", o.mu_decay, "Decay factor in (0, 1]");
  cmd->add_option("--mu-growth", o.mu_growth, "Growth factor >= 1");
  cmd->add_option("--inner-tol", o.inner_tol,
                  "Relative residual tolerance of the inner loop");
  cmd->add_option("--tol", o.tol,
                  "Outer stop: largest transform parameter update");
  cmd->add_option("--max-inner", o.max_inner, "Inner iteration cap");
  cmd->add_option("--max-outer", o.max_outer, "Outer iteration cap");
  cmd->add_option("--project-target", o.project_target,
                  "Which iterate the manifold projection reads")
      ->check(CLI::IsMember({"vr-plus-e", "vm-lin"}));
  cmd->add_flag("--freeze-manifold,!--no-freeze-manifold", o.freeze_manifold,
                "Rebuild the manifold once per outer iteration only "
                "(default on)");
  cmd->add_option("--height", o.height,
                  "Working frame height; 0 keeps the first image's height");
  cmd->add_option("--width", o.width,
                  "Working frame width; 0 keeps the first image's width");
  cmd->add_option("--seed", o.seed, "Seed recorded in the run manifest");
}

std::pair<int, int> probe_dims(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw lrd::IoError("probe: " + dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".png") files.push_back(entry.path());
  }
  if (files.empty())
    throw lrd::IoError("probe: no png images in " + dir.string());
  std::sort(files.begin(), files.end());
  const lrd::Image first = lrd::read_png_gray(files.front());
  return {static_cast<int>(first.rows()), static_cast<int>(first.cols())};
}

lrd::ImageBatch load_input(const fs::path& dir, int height, int width) {
  if (height <= 0 || width <= 0) {
    const auto [h, w] = probe_dims(dir);
    if (height <= 0) height = h;
    if (width <= 0) width = w;
  }
  return lrd::load_batch(dir, height, width);
}

lrd::Image mean_image(const std::vector<lrd::Image>& images) {
  lrd::Image acc = images.front();
  for (std::size_t i = 1; i < images.size(); ++i) acc += images[i];
  return acc / static_cast<double>(images.size());
}

std::vector<lrd::Image> aligned_images(const lrd::ImageBatch& batch,
                                       const lrd::TransformStack& taus) {
  std::vector<lrd::Image> out;
  for (int i = 0; i < batch.count(); ++i)
    out.push_back(lrd::warp(batch.images[static_cast<std::size_t>(i)],
                            taus.per_image[static_cast<std::size_t>(i)]));
  return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  fs::path out;
  std::string base = "face";
  int height = 64;
  int width = 64;
  int count = 16;
  double rotate = 0.0;
  double shift = 0.0;
  double gain_lo = 1.0;
  double gain_hi = 1.0;
  int occlusions = 0;
  int occlusion_size = 8;
  double occlusion_intensity = 1.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthOptions& o) {
  lrd::SynthSpec spec;
  spec.base_name = o.base;
  spec.height = o.height;
  spec.width = o.width;
  spec.count = o.count;
  spec.rotation_range_deg = o.rotate;
  spec.shift_range_px = o.shift;
  spec.gain_lo = o.gain_lo;
  spec.gain_hi = o.gain_hi;
  spec.occlusion.patch_count = o.occlusions;
  spec.occlusion.patch_size = o.occlusion_size;
  spec.occlusion.intensity = o.occlusion_intensity;
  spec.noise_sigma = o.noise;
  spec.seed = o.seed;

  const lrd::SynthResult data = lrd::synthesize(spec);
  fs::create_directories(o.out);
  char name[32];
  for (int i = 0; i < data.batch.count(); ++i) {
    std::snprintf(name, sizeof(name), "image_%03d.png", i);
    lrd::write_png_gray(data.batch.images[static_cast<std::size_t>(i)],
                        o.out / name);
  }
  lrd::save_landmarks(data.base_landmarks, data.batch.landmarks,
                      o.out / "landmarks.txt");
  lrd::save_transforms(data.truth, o.out / "truth.txt");
  write_manifest(o.out / "manifest.txt",
                 {{"command", "synth"},
                  {"tool_version", kToolVersion},
                  {"timestamp_utc", timestamp_utc()},
                  {"base", o.base},
                  {"height", std::to_string(o.height)},
                  {"width", std::to_string(o.width)},
                  {"count", std::to_string(o.count)},
                  {"rotate", num(o.rotate)},
                  {"shift", num(o.shift)},
                  {"gain_lo", num(o.gain_lo)},
                  {"gain_hi", num(o.gain_hi)},
                  {"occlusions", std::to_string(o.occlusions)},
                  {"occlusion_size", std::to_string(o.occlusion_size)},
                  {"occlusion_intensity", num(o.occlusion_intensity)},
                  {"noise", num(o.noise)},
                  {"seed", std::to_string(o.seed)},
                  {"out", o.out.string()}});
  std::cout << "wrote " << data.batch.count() << " images to "
            << o.out.string() << "\n";
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
  fs::path input;
  fs::path out;
  SolverOptions solver;
};

std::vector<ErrorRow> error_rows(const fs::path& data_dir,
                                 const lrd::TransformStack& estimated,
                                 const std::string& label) {
  const lrd::LandmarkFile lm =
      lrd::load_landmarks(data_dir / "landmarks.txt");
  const auto initial =
      lrd::identity_stack(estimated.group(), estimated.count());
  return {{"Initial", lrd::landmark_error(initial, lm.per_image, lm.base)},
          {label, lrd::landmark_error(estimated, lm.per_image, lm.base)}};
}

void cmd_decompose(const DecomposeOptions& o) {
  const lrd::ImageBatch batch =
      load_input(o.input, o.solver.height, o.solver.width);
  const lrd::SolverConfig cfg = o.solver.config();
  const auto group = lrd::group_from_name(o.solver.transform);
  const auto initial = lrd::identity_stack(group, batch.count());

  fs::create_directories(o.out);
  TraceLogger logger(o.out / "trace.txt", log_level_from_env(),
                     cfg.method == lrd::Method::Meadmm);

  const auto t0 = std::chrono::steady_clock::now();
  const lrd::DecompositionResult res =
      lrd::align_and_decompose(batch, initial, cfg, logger.sink());
  const double wall_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - t0)
          .count();

  lrd::save_result(res, batch, o.out);
  auto entries = o.solver.manifest_entries();
  entries.insert(entries.begin(),
                 {{"command", "decompose"},
                  {"tool_version", kToolVersion},
                  {"timestamp_utc", timestamp_utc()},
                  {"input", o.input.string()},
                  {"out", o.out.string()}});
  entries.emplace_back("wall_ms", num(wall_ms));
  write_manifest(o.out / "manifest.txt", entries);

  std::cout << "converged = " << (res.converged ? 1 : 0) << "\n";
  std::cout << "outer_iterations = " << res.inner_iters.size() << "\n";
  std::cout << "objective = " << num(res.objective_trace.back()) << "\n";
  std::cout << "wall_ms = " << num(wall_ms) << "\n";
  if (fs::exists(o.input / "landmarks.txt"))
    std::cout << format_error_table(
        error_rows(o.input, res.taus, o.solver.method));
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  fs::path result;
  fs::path data;
  fs::path out;
};

void cmd_eval(const EvalOptions& o) {
  const lrd::DecompositionResult res = lrd::load_result(o.result);
  std::string label = manifest_value(o.result / "manifest.txt", "method");
  if (label.empty()) label = "estimate";
  const std::string table =
      format_error_table(error_rows(o.data, res.taus, label));
  std::cout << table;
  const fs::path out = o.out.empty() ? o.result / "eval.txt" : o.out;
  std::ofstream f(out);
  if (!f) throw lrd::IoError("eval: cannot write " + out.string());
  f << table;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  fs::path input;
  fs::path out;
  SolverOptions solver;
};

void cmd_compare(const CompareOptions& o) {
  const lrd::ImageBatch batch =
      load_input(o.input, o.solver.height, o.solver.width);
  const auto group = lrd::group_from_name(o.solver.transform);
  const auto initial = lrd::identity_stack(group, batch.count());
  fs::create_directories(o.out);

  struct MethodRun {
    std::string name;
    lrd::DecompositionResult result;
    double wall_ms = 0.0;
  };
  std::vector<MethodRun> runs;
  for (const std::string& method : {std::string("rasl"),
                                    std::string("meadmm")}) {
    SolverOptions so = o.solver;
    so.method = method;
    const fs::path sub = o.out / method;
    fs::create_directories(sub);
    TraceLogger logger(sub / "trace.txt", log_level_from_env(),
                       method == "meadmm");
    const auto t0 = std::chrono::steady_clock::now();
    lrd::DecompositionResult res =
        lrd::align_and_decompose(batch, initial, so.config(), logger.sink());
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    lrd::save_result(res, batch, sub);
    auto entries = so.manifest_entries();
    entries.insert(entries.begin(),
                   {{"command", "compare"},
                    {"tool_version", kToolVersion},
                    {"timestamp_utc", timestamp_utc()},
                    {"input", o.input.string()},
                    {"out", sub.string()}});
    entries.emplace_back("wall_ms", num(ms));
    write_manifest(sub / "manifest.txt", entries);
    runs.push_back({method, std::move(res), ms});
  }

  std::string report;
  if (fs::exists(o.input / "landmarks.txt")) {
    const lrd::LandmarkFile lm =
        lrd::load_landmarks(o.input / "landmarks.txt");
    std::vector<ErrorRow> rows = {
        {"Initial",
         lrd::landmark_error(initial, lm.per_image, lm.base)}};
    for (const MethodRun& run : runs)
      rows.push_back(
          {run.name, lrd::landmark_error(run.result.taus, lm.per_image,
                                         lm.base)});
    report += format_error_table(rows);
  }
  for (const MethodRun& run : runs)
    report += run.name + "_ms = " + num(run.wall_ms) + "\n";

  std::ofstream f(o.out / "compare.txt");
  if (!f) throw lrd::IoError("compare: cannot write compare.txt");
  f << report;
  f.close();

  lrd::write_png_gray(
      lrd::tile_images({mean_image(batch.images),
                        mean_image(aligned_images(batch, runs[0].result.taus)),
                        mean_image(aligned_images(batch, runs[1].result.taus))}),
      o.out / "montage_compare.png");
  std::cout << report;
}

}  // namespace

// Splice "key = value" pairs from a per-subcommand --config file into the
// argument list. Values become defaults: a key already present on the command
// line keeps its explicit value. Done by hand because the argument parser
// only reads config files attached to the root command, not to subcommands.
std::vector<std::string> apply_config_file(std::vector<std::string> args,
                                           const CLI::App& app) {
  if (args.empty() || args.front().empty() || args.front().front() == '-')
    return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw CLI::FileError(path + " was not readable (missing?)");
  const auto strip = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  const auto fail = [&](int lineno, const std::string& what) {
    return CLI::FileError(path + ":" + std::to_string(lineno) + ": " + what);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = strip(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw fail(lineno, "expected key = value");
    const std::string key = strip(text.substr(0, eq));
    std::string value = strip(text.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw fail(lineno, "empty key");
    if (key == "config") continue;
    const std::string name = "--" + key;
    const CLI::Option* op = sub->get_option_no_throw(name);
    if (op == nullptr) throw fail(lineno, "unknown key '" + key + "'");
    const bool is_flag = op->get_type_size_max() == 0;
    bool given = false;
    for (std::size_t i = 1; i < args.size() && !given; ++i) {
      given = args[i] == name || args[i].rfind(name + "=", 0) == 0;
      if (is_flag && !given) {
        const std::string negated = "--no-" + key;
        given = args[i] == negated;
      }
    }
    if (given) continue;
    if (is_flag) {
      const bool truthy =
          value == "1" || value == "true" || value == "on" || value == "yes";
      const bool falsy =
          value == "0" || value == "false" || value == "off" || value == "no";
      if (!truthy && !falsy)
        throw fail(lineno, "flag '" + key + "' wants true or false");
      if (truthy)
        args.push_back(name);
      else if (sub->get_option_no_throw("--no-" + key) != nullptr)
        args.push_back("--no-" + key);
    } else {
      args.push_back(name);
      args.push_back(value);
    }
  }
  return args;
}

int main(int argc, char** argv) {
  CLI::App app{"Robust batch image alignment and low-rank plus sparse "
               "decomposition"};
  app.name("lrd");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SynthOptions synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a perturbed synthetic batch");
  std::string config_path;
  synth_cmd->add_option("--config", config_path,
                        "Configuration file (key = value)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--base", synth.base, "Base pattern")
      ->check(CLI::IsMember({"face", "blobs", "checker"}));
  synth_cmd->add_option("--height", synth.height, "Image height");
  synth_cmd->add_option("--width", synth.width, "Image width");
  synth_cmd->add_option("--count", synth.count, "Number of images");
  synth_cmd->add_option("--rotate", synth.rotate,
                        "Rotation range in degrees, drawn from +- this");
  synth_cmd->add_option("--shift", synth.shift,
                        "Shift range in pixels per axis, drawn from +- this");
  synth_cmd->add_option("--gain-lo", synth.gain_lo, "Lower gain bound");
  synth_cmd->add_option("--gain-hi", synth.gain_hi, "Upper gain bound");
  synth_cmd->add_option("--occlusions", synth.occlusions,
                        "Occlusion patches per image");
  synth_cmd->add_option("--occlusion-size", synth.occlusion_size,
                        "Occlusion patch side length");
  synth_cmd->add_option("--occlusion-intensity", synth.occlusion_intensity,
                        "Occlusion paint intensity");
  synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->required();
  synth_cmd->callback([&] { cmd_synth(synth); });

  DecomposeOptions dec;
  CLI::App* dec_cmd = app.add_subcommand(
      "decompose", "Align a batch and split it into low-rank plus sparse");
  dec_cmd->add_option("--config", config_path,
                      "Configuration file (key = value)");
  dec_cmd->add_option("--input", dec.input, "Directory of png images")
      ->required();
  dec_cmd->add_option("--out", dec.out, "Output directory")->required();
  add_solver_flags(dec_cmd, dec.solver, true);
  dec_cmd->callback([&] { cmd_decompose(dec); });

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Report landmark alignment errors for a result");
  eval_cmd->add_option("--result", ev.result, "Result directory")->required();
  eval_cmd->add_option("--data", ev.data,
                       "Dataset directory containing landmarks.txt")
      ->required();
  eval_cmd->add_option("--out", ev.out,
                       "Report file (default: result/eval.txt)");
  eval_cmd->callback([&] { cmd_eval(ev); });

  CompareOptions cmp;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "Run both solver variants and report side by side");
  cmp_cmd->add_option("--config", config_path,
                      "Configuration file (key = value)");
  cmp_cmd->add_option("--input", cmp.input, "Directory of png images")
      ->required();
  cmp_cmd->add_option("--out", cmp.out, "Output directory")->required();
  add_solver_flags(cmp_cmd, cmp.solver, false);
  cmp_cmd->callback([&] { cmd_compare(cmp); });

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config_file(std::move(args), app);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
