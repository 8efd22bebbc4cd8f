#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "hyperlq/closed_loop.hpp"
#include "hyperlq/csv.hpp"
#include "hyperlq/errors.hpp"
#include "hyperlq/riccati.hpp"
#include "hyperlq/serialization.hpp"
#include "hyperlq/turnpike.hpp"
#include "manifest.hpp"

namespace hyperlq::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Random streams, one per kind of draw.
constexpr std::uint64_t kDecayStream = 1;
constexpr std::uint64_t kNullControlStream = 2;
constexpr std::uint64_t kTurnpikeStream = 3;

json Num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
// exception (lowest index) is rethrown after all workers finish.
void ParallelFor(size_t count, int threads, const std::function<void(size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t n = std::min<size_t>(count, static_cast<size_t>(std::max(1, threads)));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class ItemWriter {
 public:
  ItemWriter(fs::path root, std::string prefix) : root_(std::move(root)), prefix_(std::move(prefix)) {
    fs::create_directories(root_ / prefix_);
  }
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& columns) {
    WriteCsv(path(name), header, columns);
    record(name);
  }
  void json_file(const std::string& name, const json& j) {
    SaveJson(path(name), j);
    record(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string path(const std::string& name) const { return (root_ / prefix_ / name).string(); }
  void record(const std::string& name) {
    files_.push_back(prefix_.empty() ? name : (fs::path(prefix_) / name).generic_string());
  }
  fs::path root_;
  std::string prefix_;
  std::vector<std::string> files_;
};

json ScaleDescription(const NormScale& s) { return s.describe(); }

json IdentityJson(const DissipationCheck& d) {
  return {{"lhs", Num(d.lhs)}, {"rhs", Num(d.rhs)}, {"relative_defect", Num(d.relative_defect)}};
}

void WriteTrajectory(ItemWriter& w, const Trajectory& tr) {
  w.csv("trajectory.csv", {"time", "energy", "value", "control_norm_sq", "obs_norm_sq"},
        {tr.times, tr.energies, tr.values, tr.control_norm_sq, tr.obs_norm_sq});
}

json FitJson(const DecayFit& f) {
  return {{"exponent", Num(f.exponent)},   {"prefactor", Num(f.prefactor)}, {"t_start", f.t_start},
          {"t_end", f.t_end},              {"r2", Num(f.r2)},               {"n_samples", f.n_samples},
          {"model_mismatch", f.model_mismatch}, {"norm", f.norm_used.describe()}};
}

void RunObservability(const SpectralSystem& sys, const ObservabilityExperiment& e, ItemWriter& w) {
  const ObservabilityReport r = fit_weak_observability(sys, e.horizon, e.shells, e.use_control);
  std::vector<double> sizes(r.shell_sizes.begin(), r.shell_sizes.end());
  w.csv("shells.csv", {"shell_edge", "shell_constant", "shell_size"}, {r.shell_edges, r.shell_constants, sizes});
  w.json_file("summary.json", {{"status", "ok"},
                               {"experiment", "observability"},
                               {"horizon", r.horizon},
                               {"use_control", r.use_control},
                               {"slope", Num(r.slope)},
                               {"fitted_exponent", Num(r.fitted_exponent)},
                               {"rho_hat", Num(r.rho_hat)},
                               {"fit_r2", Num(r.fit_r2)},
                               {"n_modes", sys.n_modes()},
                               {"warnings", r.warnings}});
}

RiccatiSolution Are(const SpectralSystem& sys, const std::string& method) {
  return solve_are(sys, method == "newton_kleinman" ? AreMethod::kNewtonKleinman : AreMethod::kDreLimit);
}

void RunBounds(const SpectralSystem& sys, const BoundsExperiment& e, std::uint64_t seed, ItemWriter& w) {
  const RiccatiSolution s = Are(sys, e.method);
  const BoundsReport r = bounds_report(s, sys, e.weak, e.strong, make_probes(sys.n_modes(), e.n_random_probes, seed));
  w.csv("bounds.csv", {"c1_hat", "c2_hat", "probe_count", "excluded", "are_residual"},
        {{r.c1_hat}, {r.c2_hat}, {double(r.probe_count)}, {double(r.excluded)}, {s.residual}});
  w.json_file("riccati.json", ToJson(s));
  w.json_file("summary.json", {{"status", "ok"},
                               {"experiment", "bounds"},
                               {"c1_hat", Num(r.c1_hat)},
                               {"c2_hat", Num(r.c2_hat)},
                               {"probe_count", r.probe_count},
                               {"excluded", r.excluded},
                               {"weak_scale", ScaleDescription(r.weak_scale)},
                               {"strong_scale", ScaleDescription(r.strong_scale)},
                               {"are_residual", Num(s.residual)},
                               {"method", s.method},
                               {"n_modes", sys.n_modes()}});
}

void RunDecay(const SpectralSystem& sys, const DecayExperiment& e, std::uint64_t seed, ItemWriter& w) {
  const EnergyState x0 = power_law_data(sys.lambdas(), e.data_exponent, seed, kDecayStream);
  const Integrator integ = e.integrator == "strang" ? Integrator::kStrang : Integrator::kExact;
  Trajectory tr;
  Mat gen;
  json extra;
  if (e.riccati) {
    const RiccatiSolution s = Are(sys, e.method);
    gen = riccati_generator(sys, s);
    tr = simulate_riccati_feedback(sys, s, x0, e.horizon, e.dt, integ);
    extra["are_residual"] = Num(s.residual);
    extra["are_method"] = s.method;
    extra["s"] = e.s;
  } else {
    gen = collocated_generator(sys);
    tr = simulate_collocated(sys, x0, e.horizon, e.dt, integ);
    extra["k"] = e.k;
  }
  std::pair<double, double> window = e.window ? *e.window : default_decay_window(gen);
  window.second = std::min(window.second, e.horizon);
  WriteTrajectory(w, tr);
  json fit;
  try {
    fit = FitJson(fit_decay(tr, e.norm, window));
  } catch (const NumericError& err) {
    w.json_file("fit.json", {{"status", "failed"}, {"error", err.what()}});
    throw;
  }
  json out = {{"status", "ok"},
              {"experiment", e.riccati ? "decay_riccati" : "decay_collocated"},
              {"fit", fit},
              {"window", {window.first, window.second}},
              {"truncation_time", Num(truncation_time(gen))},
              {"data_exponent", e.data_exponent},
              {"dissipation_identity", IdentityJson(tr.identity)},
              {"integrator", e.integrator},
              {"n_modes", sys.n_modes()}};
  out.update(extra);
  w.json_file("fit.json", out);
}

void RunNullControl(const SpectralSystem& sys, const NullControlExperiment& e, std::uint64_t seed,
                    ItemWriter& w) {
  const EnergyState x0 = power_law_data(sys.lambdas(), e.data_exponent, seed, kNullControlStream);
  const NullControlResult r = hum_null_control(sys, x0, e.t0, e.n_samples);
  std::vector<std::string> header{"time"};
  std::vector<std::vector<double>> cols{r.times};
  for (int j = 0; j < sys.n_controls(); ++j) {
    header.push_back("u_" + std::to_string(j));
    std::vector<double> c;
    c.reserve(r.controls.size());
    for (const Vec& u : r.controls) c.push_back(u[j]);
    cols.push_back(std::move(c));
  }
  w.csv("control.csv", header, cols);
  w.json_file("summary.json", {{"status", "ok"},
                               {"experiment", "null_control"},
                               {"cost", Num(r.cost)},
                               {"terminal_residual", Num(r.terminal_residual)},
                               {"gramian_condition", Num(r.gramian_condition)},
                               {"certified", r.certified},
                               {"note", r.note},
                               {"x0_energy_norm_sq", Num(norm_squared(x0, sys.lambdas(), NormScale::Energy()))},
                               {"t0", e.t0},
                               {"n_modes", sys.n_modes()}});
}

void RunTurnpike(const SpectralSystem& sys, const TurnpikeExperiment& e, std::uint64_t seed, int threads,
                 ItemWriter& w) {
  const int n = sys.n_modes();
  Vec z(n);
  if (!e.z.empty()) {
    if (static_cast<int>(e.z.size()) != n)
      throw ConfigError("experiment.z", "has " + std::to_string(e.z.size()) + " entries, model has " +
                                            std::to_string(n) + " modes");
    z = Eigen::Map<const Vec>(e.z.data(), n);
  } else {
    z = e.z_scale * sys.lambdas().array().pow(-e.z_exponent).matrix();
  }
  const EnergyState x0 = power_law_data(sys.lambdas(), e.data_exponent, seed, kTurnpikeStream);
  const StationarySolution st = solve_stationary(sys, z);
  std::vector<TrackingResult> runs(e.horizons.size());
  ParallelFor(runs.size(), threads, [&](size_t i) { runs[i] = solve_tracking(sys, z, x0, e.horizons[i], e.dt); });
  const TurnpikeReport rep = averaged_metrics(sys, runs, e.horizons, st, x0, e.rho, e.eta, e.k, e.ktilde);
  w.csv("turnpike.csv", {"horizon", "avg_tracking", "avg_state_gap", "bound_proxy"},
        {rep.horizons, rep.avg_tracking, rep.avg_state_gap, rep.bound_values});
  const Trajectory& longest = runs.back().trajectory;
  w.csv("pointwise.csv", {"time", "deviation_sq"}, {longest.times, longest.values});
  json per_run = json::array();
  for (const TrackingResult& r : runs) {
    per_run.push_back({{"horizon", r.horizon},
                       {"cost", Num(r.cost)},
                       {"cost_identity", Num(r.cost_identity)},
                       {"os_residual", Num(r.os_residual)}});
  }
  json out = {{"status", "ok"},
              {"experiment", "turnpike"},
              {"stationary",
               {{"cost", Num(st.cost)},
                {"state_residual", Num(st.state_residual)},
                {"adjoint_residual", Num(st.adjoint_residual)},
                {"control_residual", Num(st.control_residual)}}},
              {"runs", per_run},
              {"k", rep.k_used},
              {"ktilde", rep.ktilde_used},
              {"n_modes", n}};
  if (rep.horizons.size() >= 2) {
    out["avg_tracking_loglog_slope"] = Num(loglog_slope(rep.horizons, rep.avg_tracking));
    out["avg_state_gap_loglog_slope"] = Num(loglog_slope(rep.horizons, rep.avg_state_gap));
  }
  w.json_file("summary.json", out);
}

bool Matches(const std::string& subcommand, const ExperimentConfig& e) {
  const std::string kind = ExperimentKind(e);
  if (subcommand == "run") return true;
  if (subcommand == "decay") return kind == "decay_collocated" || kind == "decay_riccati";
  if (subcommand == "null-control") return kind == "null_control";
  return kind == subcommand;
}

}  // namespace

int ResolveThreads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("HYPERLQ_THREADS")) {
    char* end = nullptr;
    const long c = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && c > 0) n = std::min<long>(n, c);
  }
  return std::max(1, n);
}

int Execute(const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    if (options.config_path.empty()) throw ConfigError("--config", "a config file is required");
    cfg = LoadConfig(options.config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.resolved["seed"] = cfg.seed;
  }
  if (!options.output_dir.empty()) {
    cfg.output_dir = options.output_dir;
    cfg.resolved["output_dir"] = cfg.output_dir;
  }
  if (options.subcommand == "validate") {
    std::cout << cfg.resolved.dump(2) << "\n";
    return kExitOk;
  }
  if (cfg.output_dir.empty()) {
    std::cerr << "config error: output_dir: required (or pass --output)\n";
    return kExitValidation;
  }
  std::vector<size_t> selected;
  for (size_t i = 0; i < cfg.items.size(); ++i)
    if (Matches(options.subcommand, cfg.items[i].experiment)) selected.push_back(i);
  if (selected.empty()) {
    std::cerr << "config error: experiment: config has no experiment for subcommand '" << options.subcommand
              << "'\n";
    return kExitValidation;
  }

  std::optional<SpectralSystem> system;
  try {
    system.emplace(BuildModel(cfg.model));
  } catch (const std::invalid_argument& e) {  // DimensionError
    std::cerr << "config error: model: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {  // DomainError
    std::cerr << "config error: model: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: model: " << e.what() << "\n";
    return kExitNumeric;
  }

  const fs::path root(cfg.output_dir);
  const int threads = ResolveThreads(options.threads);
  std::vector<std::vector<std::string>> files(selected.size());
  std::vector<std::string> failures(selected.size());
  std::vector<int> codes(selected.size(), kExitOk);
  std::mutex log_mutex;
  // Items run concurrently; turnpike horizons then run serially inside each.
  const int inner = selected.size() > 1 ? 1 : threads;
  try {
    fs::create_directories(root);
    ItemWriter top(root, "");
    top.json_file("config.resolved.json", cfg.resolved);
    top.json_file("system.json", ToJson(*system));
    files.push_back(top.files());
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write to " << root << ": " << e.what() << "\n";
    return kExitNumeric;
  }
  ParallelFor(selected.size(), threads, [&](size_t k) {
    const ExperimentItem& item = cfg.items[selected[k]];
    ItemWriter w(root, item.name);
    try {
      std::visit(
          [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ObservabilityExperiment>) RunObservability(*system, e, w);
            if constexpr (std::is_same_v<T, BoundsExperiment>) RunBounds(*system, e, cfg.seed, w);
            if constexpr (std::is_same_v<T, DecayExperiment>) RunDecay(*system, e, cfg.seed, w);
            if constexpr (std::is_same_v<T, NullControlExperiment>) RunNullControl(*system, e, cfg.seed, w);
            if constexpr (std::is_same_v<T, TurnpikeExperiment>) RunTurnpike(*system, e, cfg.seed, inner, w);
          },
          item.experiment);
      if (!options.quiet) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cout << (item.name.empty() ? ExperimentKind(item.experiment) : item.name) << ": ok\n";
      }
    } catch (const ConfigError& e) {
      failures[k] = std::string("config error: ") + e.what();
      codes[k] = kExitValidation;
    } catch (const std::exception& e) {
      failures[k] = std::string("numeric failure: ") + e.what();
      codes[k] = kExitNumeric;
    }
    if (codes[k] != kExitOk) {
      try {
        const std::string name = "summary.json";
        if (!fs::exists(root / item.name / name) ||
            LoadJson((root / item.name / name).string()).value("status", "") == "ok") {
          w.json_file(name, {{"status", "failed"}, {"error", failures[k]}});
        }
      } catch (...) {
      }
    }
    files[k] = w.files();
  });

  int code = kExitOk;
  Manifest m;
  for (size_t k = 0; k < selected.size(); ++k) {
    if (codes[k] != kExitOk) {
      std::cerr << failures[k] << "\n";
      code = std::max(code, codes[k]);
      m.status = "failed";
    }
  }
  std::vector<std::string> all;
  for (const auto& f : files) all.insert(all.end(), f.begin(), f.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  m.config_hash = Sha256Hex(cfg.resolved.dump());
  m.seed = cfg.seed;
  m.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    WriteManifest(root.string(), all, m);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return code;
}

int Main(int argc, char** argv) {
  CLI::App app{"Spectral LQ experiments for slowly decaying hyperbolic systems"};
  app.require_subcommand(1);
  RunOptions opt;
  std::uint64_t seed = 0;
  for (const char* name : {"run", "observability", "bounds", "decay", "null-control", "turnpike", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    sub->add_option("--output", opt.output_dir, "output directory, overrides output_dir");
    sub->add_option("--seed", seed, "seed for every random draw, overrides the config");
    sub->add_option("--threads", opt.threads, "worker threads (HYPERLQ_THREADS caps this)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", opt.quiet, "no progress output");
    sub->callback([&opt, sub, name]() { opt.subcommand = name; (void)sub; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opt.seed = seed;
  }
  return Execute(opt);
}

}  // namespace hyperlq::cli
