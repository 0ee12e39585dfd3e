// Command-line front end: fit, eval, bench, convert and replay.

#include "CLI11.hpp"
#include "json.hpp"

#include "tfvb/contraction.hpp"
#include "tfvb/error.hpp"
#include "tfvb/eval.hpp"
#include "tfvb/io.hpp"
#include "tfvb/model.hpp"
#include "tfvb/random.hpp"
#include "tfvb/solvers.hpp"
#include "tfvb/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tfvb;

namespace {

constexpr int kManifestVersion = 1;

// Carries the exit code and final message up to main.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(const std::string& context, const Error& e) {
  std::string where = context;
  if (e.line() > 0 && context.find(':') == std::string::npos)
    where += ":" + std::to_string(e.line());
  throw Failure{e.is_numeric() ? 2 : 1, where.empty() ? e.what() : where + ": " + e.what()};
}

template <typename F>
auto in_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(context, e);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{1, path + ": cannot open file"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Writes through a temporary file so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Failure{1, tmp.string() + ": cannot write file"};
    out << content;
    if (!out) throw Failure{1, tmp.string() + ": write failed"};
  }
  fs::rename(tmp, path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{1, dir.string() + ": " + ec.message()};
}

std::string model_label(const std::string& file) {
  return file.empty() ? "model" : fs::path(file).stem().string();
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string mean_pm_std(const std::vector<double>& v) {
  return format_double(mean_of(v)) + " ± " + format_double(std_of(v));
}

// Options shared by the commands that fit a model.
struct SolverOptions {
  std::string algo = "vb";
  int iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  double eps = 1e-12;
  std::optional<double> prior_a;
  std::optional<double> prior_b;

  SolverConfig config() const {
    SolverConfig c;
    c.algorithm = parse_algorithm(algo);
    c.max_iters = iters;
    c.rel_tol = tol;
    c.seed = seed;
    c.epsilon_guard = eps;
    c.validate();
    return c;
  }
};

void to_json(json& j, const SolverOptions& o) {
  j = json{{"algorithm", o.algo}, {"max_iters", o.iters}, {"rel_tol", o.tol},
           {"seed", o.seed},      {"epsilon_guard", o.eps}};
  j["A"] = o.prior_a ? json(*o.prior_a) : json(nullptr);
  j["B"] = o.prior_b ? json(*o.prior_b) : json(nullptr);
}

void from_json(const json& j, SolverOptions& o) {
  j.at("algorithm").get_to(o.algo);
  j.at("max_iters").get_to(o.iters);
  j.at("rel_tol").get_to(o.tol);
  j.at("seed").get_to(o.seed);
  j.at("epsilon_guard").get_to(o.eps);
  o.prior_a = j.at("A").is_null() ? std::nullopt : std::optional<double>(j.at("A").get<double>());
  o.prior_b = j.at("B").is_null() ? std::nullopt : std::optional<double>(j.at("B").get<double>());
}

void add_solver_flags(CLI::App& cmd, SolverOptions& o) {
  cmd.add_option("--algo", o.algo, "em, map-em or vb")
      ->envname("TFVB_ALGO")
      ->capture_default_str();
  cmd.add_option("--iters", o.iters, "maximum sweeps")->envname("TFVB_ITERS")->capture_default_str();
  cmd.add_option("--tol", o.tol, "relative objective tolerance")
      ->envname("TFVB_TOL")
      ->capture_default_str();
  cmd.add_option("--seed", o.seed, "master seed")->envname("TFVB_SEED")->capture_default_str();
  cmd.add_option("--eps", o.eps, "zero guard")->envname("TFVB_EPS")->capture_default_str();
  cmd.add_option("--A", o.prior_a, "prior shape for every factor")->envname("TFVB_A");
  cmd.add_option("--B", o.prior_b, "prior mean for every factor")->envname("TFVB_B");
}

// Model-file priors with the defaults as fallback; --A / --B override every
// factor.
std::vector<PriorSpec> make_priors(const ModelSpec& spec, const SolverOptions& o) {
  auto priors = resolve_priors(spec, PriorSpec{});
  for (auto& p : priors) {
    if (o.prior_a) p.shape.setConstant(*o.prior_a);
    if (o.prior_b) p.mean.setConstant(*o.prior_b);
  }
  for (Index a = 0; a < spec.num_factors(); ++a)
    in_context("prior", [&] { priors[a].validate(spec.factor_size(a), spec.factor(a).name); });
  return priors;
}

struct DataFile {
  std::string path;
  std::string hash;
};

void to_json(json& j, const DataFile& d) { j = json{{"file", d.path}, {"fnv1a64", d.hash}}; }
void from_json(const json& j, DataFile& d) {
  j.at("file").get_to(d.path);
  j.at("fnv1a64").get_to(d.hash);
}

struct ModelInput {
  std::string file;
  std::string text;
};

ModelInput load_model_file(const std::string& path) { return {path, read_text(path)}; }

ModelSpec parse_model(const ModelInput& m) {
  return in_context(m.file, [&] { return parse_model_spec(m.text); });
}

std::vector<DataFile> describe_data(const std::vector<std::string>& paths) {
  std::vector<DataFile> out;
  for (const auto& p : paths) {
    std::error_code ec;
    auto abs = fs::absolute(p, ec);
    out.push_back({ec ? p : abs.lexically_normal().string(), fnv1a_hex(read_text(p))});
  }
  return out;
}

// Loads one tensor per observation and checks it against the model.
std::vector<SparseTensor> load_observations(const ModelSpec& spec,
                                            const std::vector<DataFile>& files,
                                            bool check_hash) {
  if (static_cast<Index>(files.size()) != spec.num_observations())
    throw Failure{1, "model declares " + std::to_string(spec.num_observations()) +
                         " observations but " + std::to_string(files.size()) +
                         " data files were given"};
  std::vector<SparseTensor> out;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto& f = files[k];
    const std::string text = read_text(f.path);
    if (check_hash && fnv1a_hex(text) != f.hash)
      throw Failure{1, f.path + ": contents differ from the manifest"};
    std::istringstream in(text);
    auto t = in_context("", [&] { return read_coo(in, f.path); });
    const auto nu = static_cast<Index>(k);
    in_context(f.path, [&] {
      if (t.indices() != spec.observation_index_names(nu))
        throw Error(Errc::ShapeMismatch, "indices do not match observation '" +
                                             spec.observation(nu).name + "'");
      validate_tensor(t, spec.space());
    });
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  ModelInput model;
  std::vector<DataFile> data;
  SolverOptions solver;
};

int run_fit(const FitOptions& o, const fs::path& out, bool check_hash) {
  const auto spec = parse_model(o.model);
  const auto obs = load_observations(spec, o.data, check_hash);
  const auto config = in_context("config", [&] { return o.solver.config(); });
  const auto priors = make_priors(spec, o.solver);
  const auto result = in_context("fit", [&] { return fit(spec, obs, config, priors); });
  for (const auto& w : result.warnings) std::cerr << "tfvb: warning: " << w << "\n";

  ensure_dir(out);
  for (const auto& f : result.factors) {
    std::ostringstream ss;
    write_factor(ss, f);
    write_atomic(out / ("factor_" + f.name + ".txt"), ss.str());
  }
  std::ostringstream trace, timing;
  trace << "iteration,objective\n";
  timing << "iteration,seconds\n";
  for (std::size_t k = 0; k < result.objective_trace.size(); ++k)
    trace << k + 1 << "," << format_double(result.objective_trace[k]) << "\n";
  for (std::size_t k = 0; k < result.iteration_seconds.size(); ++k)
    timing << k + 1 << "," << format_double(result.iteration_seconds[k]) << "\n";
  write_atomic(out / "trace.csv", trace.str());
  write_atomic(out / "timing.csv", timing.str());

  json manifest{{"tool", "tfvb"},
                {"version", kManifestVersion},
                {"command", "fit"},
                {"model", {{"file", o.model.file}, {"text", o.model.text}}},
                {"data", o.data},
                {"solver", o.solver},
                {"result",
                 {{"iterations_run", result.iterations_run},
                  {"termination", std::string(to_string(result.termination))},
                  {"final_objective", result.objective_trace.empty()
                                          ? json(nullptr)
                                          : json(result.objective_trace.back())}}}};
  write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "fit: " << result.iterations_run << " sweeps ("
            << to_string(result.termination) << "), outputs in " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  ModelInput model;
  std::vector<DataFile> data;
  std::string target;
  double hide = 0.6;
  std::string scope = "entries";
  std::string slice_index;
  int repeats = 10;
  SolverOptions solver;
};

struct EvalRow {
  std::uint64_t seed;
  double auc;
  double rmse;
  int iterations;
  double wall;
};

int run_eval(const EvalOptions& o, const fs::path& out, bool check_hash) {
  const auto spec = parse_model(o.model);
  auto obs = load_observations(spec, o.data, check_hash);
  const auto base = in_context("config", [&] { return o.solver.config(); });
  const auto priors = make_priors(spec, o.solver);
  if (o.repeats < 1) throw Failure{1, "config: --repeats must be at least 1"};
  if (o.scope != "entries" && o.scope != "slices")
    throw Failure{1, "config: --scope must be entries or slices"};

  Index target = 0;
  if (!o.target.empty()) {
    auto found = spec.find_observation(o.target);
    if (!found) throw Failure{1, "config: unknown observation '" + o.target + "'"};
    target = *found;
  }
  const auto& full = obs[static_cast<std::size_t>(target)];
  bool binary = true;
  for (double v : full.values()) binary = binary && (v == 0.0 || v == 1.0);

  SplitSpec split_spec;
  split_spec.hide_fraction = o.hide;
  split_spec.scope = o.scope == "slices" ? SplitScope::Slices : SplitScope::Entries;
  split_spec.slice_index =
      o.slice_index.empty() ? spec.observation_index_names(target).front() : o.slice_index;

  std::vector<EvalRow> rows;
  for (int r = 0; r < o.repeats; ++r) {
    EvalRow row{};
    row.seed = o.solver.seed + static_cast<std::uint64_t>(r);
    split_spec.seed = derive_seed(row.seed, "mask");
    auto config = base;
    config.seed = row.seed;
    const auto split = in_context(o.data[static_cast<std::size_t>(target)].path,
                                  [&] { return make_split(full, split_spec); });
    const auto start = std::chrono::steady_clock::now();
    if (binary) {
      auto report = in_context("eval", [&] {
        return link_prediction_eval(spec, config, priors, obs, target, split.train, split.test);
      });
      row.auc = report.auc;
      row.rmse = report.rmse;
      row.iterations = report.fit.iterations_run;
    } else {
      // Count data: RMSE on the held-out counts, AUC on their nonzero pattern.
      auto train_obs = obs;
      train_obs[static_cast<std::size_t>(target)] = split.train;
      auto result = in_context("fit", [&] { return fit(spec, train_obs, config, priors); });
      const auto view =
          config.algorithm == Algorithm::VB ? FactorView::Mean : FactorView::Values;
      auto scores = in_context(
          "eval", [&] { return reconstruct_observed(spec, result.factors, view, target, split.test); });
      row.rmse = rmse(scores, split.test);
      std::vector<double> s(scores.values().begin(), scores.values().end());
      std::vector<int> y;
      for (double v : split.test.values()) y.push_back(v > 0.0);
      try {
        row.auc = auc(s, y);
      } catch (const Error&) {
        row.auc = std::numeric_limits<double>::quiet_NaN();
      }
      row.iterations = result.iterations_run;
    }
    row.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }

  const std::string label = model_label(o.model.file);
  const std::string hide = format_double(o.hide);
  std::ostringstream csv;
  csv << "algorithm,model,hide_fraction,seed,auc,rmse,iterations,wall_time\n";
  std::vector<double> aucs, rmses, iters, walls;
  for (const auto& r : rows) {
    csv << o.solver.algo << "," << label << "," << hide << "," << r.seed << ","
        << format_double(r.auc) << "," << format_double(r.rmse) << "," << r.iterations << ","
        << format_double(r.wall) << "\n";
    aucs.push_back(r.auc);
    rmses.push_back(r.rmse);
    iters.push_back(r.iterations);
    walls.push_back(r.wall);
  }
  csv << o.solver.algo << "," << label << "," << hide << ",mean ± std," << mean_pm_std(aucs)
      << "," << mean_pm_std(rmses) << "," << mean_pm_std(iters) << "," << mean_pm_std(walls)
      << "\n";

  ensure_dir(out);
  write_atomic(out / "eval.csv", csv.str());
  json manifest{{"tool", "tfvb"},
                {"version", kManifestVersion},
                {"command", "eval"},
                {"model", {{"file", o.model.file}, {"text", o.model.text}}},
                {"data", o.data},
                {"target", spec.observation(target).name},
                {"hide_fraction", o.hide},
                {"scope", o.scope},
                {"slice_index", split_spec.slice_index},
                {"repeats", o.repeats},
                {"solver", o.solver}};
  write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << o.solver.algo << " " << label << " hide=" << hide << " AUC " << mean_pm_std(aucs)
            << " RMSE " << mean_pm_std(rmses) << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::vector<Index> dims{100, 100, 100};
  Index rank = 5;
  double observed_frac = 0.01;
  double noise = 0.2;
  double holdout = 0.1;
  int repeats = 1;
  SolverOptions solver;
};

int run_bench(const BenchOptions& o, const fs::path& out) {
  const auto base = in_context("config", [&] { return o.solver.config(); });
  if (o.repeats < 1) throw Failure{1, "config: --repeats must be at least 1"};
  std::ostringstream csv;
  csv << "repeat,iteration,elapsed_seconds,heldout_rmse\n";
  std::vector<double> final_rmse, baseline_rmse, per_iter;
  for (int r = 0; r < o.repeats; ++r) {
    const std::uint64_t seed = derive_seed(o.solver.seed, "repeat", static_cast<std::uint64_t>(r));
    SynthSpec synth;
    synth.dims = o.dims;
    synth.rank = o.rank;
    synth.observed_fraction = o.observed_frac;
    synth.noise_std_fraction = o.noise;
    synth.seed = seed;
    const auto data = in_context("bench", [&] { return generate_cp_data(synth); });
    const auto model = cp_model(o.dims, o.rank);
    const auto priors = make_priors(model, o.solver);

    SplitSpec split_spec;
    split_spec.hide_fraction = o.holdout;
    split_spec.seed = derive_seed(seed, "mask", 1);
    const auto split = in_context("bench", [&] { return make_split(data.observations, split_spec); });

    const double train_mean = split.train.values().mean();
    baseline_rmse.push_back(
        rmse(split.test.with_values(Eigen::ArrayXd::Constant(split.test.nnz(), train_mean)),
             split.test));

    auto config = base;
    config.seed = seed;
    const auto view = config.algorithm == Algorithm::VB ? FactorView::Mean : FactorView::Values;
    std::vector<double> trajectory;
    std::vector<SparseTensor> train{split.train};
    auto result = in_context("fit", [&] {
      return fit(model, train, config, priors, std::nullopt,
                 [&](int, const std::vector<Factor>& f) {
                   auto pred = reconstruct_observed(model, f, view, 0, split.test);
                   trajectory.push_back(rmse(pred, split.test));
                 });
    });
    double elapsed = 0.0;
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
      elapsed += result.iteration_seconds[k];
      csv << r << "," << k + 1 << "," << format_double(elapsed) << ","
          << format_double(trajectory[k]) << "\n";
    }
    final_rmse.push_back(trajectory.back());
    per_iter.push_back(elapsed / static_cast<double>(trajectory.size()));
  }

  ensure_dir(out);
  write_atomic(out / "trajectory.csv", csv.str());
  json manifest{{"tool", "tfvb"},       {"version", kManifestVersion},
                {"command", "bench"},   {"dims", o.dims},
                {"rank", o.rank},       {"observed_frac", o.observed_frac},
                {"noise", o.noise},     {"holdout", o.holdout},
                {"repeats", o.repeats}, {"solver", o.solver}};
  write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "held-out RMSE " << mean_pm_std(final_rmse) << " (constant-mean baseline "
            << mean_pm_std(baseline_rmse) << "), seconds per sweep " << mean_pm_std(per_iter)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- convert

int run_convert(const std::string& in_file, bool reindex, const std::string& out_file) {
  std::istringstream in(read_text(in_file));
  ConvertOptions opts;
  opts.reindex = reindex;
  auto t = in_context("", [&] { return convert_coo(in, in_file, opts); });
  std::ostringstream ss;
  write_coo(ss, t);
  if (out_file.empty() || out_file == "-")
    std::cout << ss.str();
  else
    write_atomic(out_file, ss.str());
  return 0;
}

// ---------------------------------------------------------------- replay

int run_replay(const std::string& manifest_file, const fs::path& out) {
  json m;
  try {
    m = json::parse(read_text(manifest_file));
    if (m.at("tool") != "tfvb" || m.at("version") != kManifestVersion)
      throw Failure{1, manifest_file + ": not a tfvb manifest of version " +
                           std::to_string(kManifestVersion)};
    const std::string command = m.at("command");
    if (command == "fit") {
      FitOptions o;
      o.model = {m.at("model").at("file"), m.at("model").at("text")};
      m.at("data").get_to(o.data);
      m.at("solver").get_to(o.solver);
      return run_fit(o, out, true);
    }
    if (command == "eval") {
      EvalOptions o;
      o.model = {m.at("model").at("file"), m.at("model").at("text")};
      m.at("data").get_to(o.data);
      m.at("target").get_to(o.target);
      m.at("hide_fraction").get_to(o.hide);
      m.at("scope").get_to(o.scope);
      m.at("slice_index").get_to(o.slice_index);
      m.at("repeats").get_to(o.repeats);
      m.at("solver").get_to(o.solver);
      return run_eval(o, out, true);
    }
    if (command == "bench") {
      BenchOptions o;
      m.at("dims").get_to(o.dims);
      m.at("rank").get_to(o.rank);
      m.at("observed_frac").get_to(o.observed_frac);
      m.at("noise").get_to(o.noise);
      m.at("holdout").get_to(o.holdout);
      m.at("repeats").get_to(o.repeats);
      m.at("solver").get_to(o.solver);
      return run_bench(o, out);
    }
    throw Failure{1, manifest_file + ": unknown command '" + command + "'"};
  } catch (const json::exception& e) {
    throw Failure{1, manifest_file + ": " + e.what()};
  }
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      long long d = std::stoll(part, &used);
      if (used != part.size() || d < 1) throw std::invalid_argument(part);
      dims.push_back(static_cast<Index>(d));
    } catch (const std::logic_error&) {
      throw Failure{1, "config: bad --dims entry '" + part + "'"};
    }
  }
  if (dims.size() == 1) dims.assign(3, dims.front());
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled nonnegative tensor factorization with EM, MAP-EM and variational Bayes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tfvb 1.0");

  std::string out_dir = "out";

  auto* fit_cmd = app.add_subcommand("fit", "fit a model to observed tensors");
  std::string model_file;
  std::vector<std::string> data_files;
  SolverOptions fit_solver;
  fit_cmd->add_option("model", model_file, "model specification file")->required();
  fit_cmd->add_option("data", data_files, "one COO file per observation, in model order")
      ->required();
  add_solver_flags(*fit_cmd, fit_solver);
  fit_cmd->add_option("--out", out_dir, "output directory")->envname("TFVB_OUT")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "held-out link prediction over repeated splits");
  EvalOptions eval_opts;
  eval_cmd->add_option("model", model_file, "model specification file")->required();
  eval_cmd->add_option("data", data_files, "one COO file per observation, in model order")
      ->required();
  eval_cmd->add_option("--target", eval_opts.target, "observation to split (default: first)")
      ->envname("TFVB_TARGET");
  eval_cmd->add_option("--hide", eval_opts.hide, "fraction of entries hidden")
      ->envname("TFVB_HIDE")
      ->capture_default_str();
  eval_cmd->add_option("--scope", eval_opts.scope, "entries or slices")
      ->envname("TFVB_SCOPE")
      ->capture_default_str();
  eval_cmd->add_option("--slice-index", eval_opts.slice_index, "index whose slices are hidden")
      ->envname("TFVB_SLICE_INDEX");
  eval_cmd->add_option("--repeats", eval_opts.repeats, "independent runs")
      ->envname("TFVB_REPEATS")
      ->capture_default_str();
  add_solver_flags(*eval_cmd, eval_opts.solver);
  eval_cmd->add_option("--out", out_dir, "output directory")->envname("TFVB_OUT")->capture_default_str();

  auto* bench_cmd = app.add_subcommand("bench", "synthetic completion benchmark");
  BenchOptions bench_opts;
  std::string dims_text = "100";
  bench_cmd->add_option("--dims", dims_text, "N for an N^3 cube, or comma-separated sizes")
      ->envname("TFVB_DIMS")
      ->capture_default_str();
  bench_cmd->add_option("--rank", bench_opts.rank, "planted and fitted rank")
      ->envname("TFVB_RANK")
      ->capture_default_str();
  bench_cmd->add_option("--observed-frac", bench_opts.observed_frac, "observed cell fraction")
      ->envname("TFVB_OBSERVED_FRAC")
      ->capture_default_str();
  bench_cmd->add_option("--noise", bench_opts.noise, "noise std relative to the data std")
      ->envname("TFVB_NOISE")
      ->capture_default_str();
  bench_cmd->add_option("--holdout", bench_opts.holdout, "fraction of observed entries held out")
      ->envname("TFVB_HOLDOUT")
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench_opts.repeats, "independent problems")
      ->envname("TFVB_REPEATS")
      ->capture_default_str();
  bench_opts.solver.iters = 50;
  add_solver_flags(*bench_cmd, bench_opts.solver);
  bench_cmd->add_option("--out", out_dir, "output directory")->envname("TFVB_OUT")->capture_default_str();

  auto* convert_cmd = app.add_subcommand("convert", "normalize coordinate data to COO text");
  std::string in_file, convert_out, from = "coo-text", to = "coo-text";
  bool reindex = false;
  convert_cmd->add_option("input", in_file, "input file")->required();
  convert_cmd->add_option("--from", from, "input format")
      ->check(CLI::IsMember({"coo-text"}))
      ->capture_default_str();
  convert_cmd->add_option("--to", to, "output format")
      ->check(CLI::IsMember({"coo-text"}))
      ->capture_default_str();
  convert_cmd->add_flag("--reindex", reindex, "input coordinates are 1-based")
      ->envname("TFVB_REINDEX");
  convert_cmd->add_option("--out", convert_out, "output file (default: stdout)");

  auto* replay_cmd = app.add_subcommand("replay", "rerun a command from its manifest");
  std::string manifest_file;
  replay_cmd->add_option("manifest", manifest_file, "manifest.json from an earlier run")
      ->required();
  replay_cmd->add_option("--out", out_dir, "output directory")->envname("TFVB_OUT")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) {
      FitOptions o{load_model_file(model_file), describe_data(data_files), fit_solver};
      return run_fit(o, out_dir, false);
    }
    if (*eval_cmd) {
      eval_opts.model = load_model_file(model_file);
      eval_opts.data = describe_data(data_files);
      return run_eval(eval_opts, out_dir, false);
    }
    if (*bench_cmd) {
      bench_opts.dims = parse_dims(dims_text);
      return run_bench(bench_opts, out_dir);
    }
    if (*convert_cmd) return run_convert(in_file, reindex, convert_out);
    if (*replay_cmd) return run_replay(manifest_file, out_dir);
  } catch (const Failure& f) {
    std::cerr << "tfvb: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "tfvb: " << e.what() << "\n";
    return e.is_numeric() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "tfvb: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
