#include "pinv/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "pinv/checks.hpp"
#include "pinv/metrics.hpp"
#include "pinv/report.hpp"
#include "pinv/search.hpp"
#include "pinv/weights.hpp"

namespace pinv {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kKnownKeys = {
    "task",   "mode",        "lambda",      "seed",    "T",        "K",
    "eta",    "C",           "epsilon",     "budget",  "weights",  "weights_file",
    "threads", "verbose",    "merge",       "active_rule", "n",    "grid_step",
    "init_radius", "l_max",  "n_b",         "heads",   "task_seed", "neighborhood_bound",
    "train_samples", "hidden", "train_epochs", "train_rate",
};

struct Settings {
  RunConfig run;
  bool have_lambda = false;
  std::optional<std::size_t> weight_count;
  std::optional<std::string> weights_file;
  unsigned threads = 1;
  ScanMerge merge = ScanMerge::kFinal;
  bool verbose = false;
};

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(key + ": cannot parse '" + cell + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

Settings resolve(const json& merged) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : merged.items()) {
    if (!kKnownKeys.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }
  Settings s;
  auto& task = s.run.task;
  if (merged.contains("task")) task.id = get<std::string>(merged, "task");
  if (merged.contains("n")) task.n = get<int>(merged, "n");
  if (merged.contains("grid_step")) task.grid_step = get<double>(merged, "grid_step");
  if (merged.contains("init_radius")) task.init_radius = get<double>(merged, "init_radius");
  if (merged.contains("l_max")) task.l_max = get<int>(merged, "l_max");
  if (merged.contains("n_b")) task.n_b = get<int>(merged, "n_b");
  if (merged.contains("heads")) task.heads = get<int>(merged, "heads");
  if (merged.contains("task_seed")) task.seed = get<std::uint64_t>(merged, "task_seed");
  if (merged.contains("train_samples")) task.training.samples = get<int>(merged, "train_samples");
  if (merged.contains("hidden")) task.training.hidden = get<int>(merged, "hidden");
  if (merged.contains("train_epochs")) task.training.epochs = get<int>(merged, "train_epochs");
  if (merged.contains("train_rate")) task.training.rate = get<double>(merged, "train_rate");
  try {
    (void)objective_count(task);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (merged.contains("mode")) {
    const auto mode = get<std::string>(merged, "mode");
    if (mode == "epo") {
      s.run.mode = DirectionMode::kEpo;
    } else if (mode == "ls") {
      s.run.mode = DirectionMode::kLs;
    } else {
      throw ConfigError("mode must be 'epo' or 'ls', got '" + mode + "'");
    }
  }
  if (merged.contains("lambda")) {
    const auto& v = merged.at("lambda");
    const auto values = v.is_string() ? parse_list(v.get<std::string>(), "lambda")
                                      : get<std::vector<double>>(merged, "lambda");
    try {
      s.run.lambda = WeightVector(values);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("lambda: ") + e.what());
    }
    s.have_lambda = true;
  }
  if (merged.contains("seed")) s.run.seed = get<std::uint64_t>(merged, "seed");
  if (merged.contains("T")) s.run.T = get<int>(merged, "T");
  if (merged.contains("K")) s.run.K = get<int>(merged, "K");
  s.run.eta = merged.contains("eta") ? get<double>(merged, "eta") : default_step_size(task.id);
  if (merged.contains("C")) s.run.C = get<std::size_t>(merged, "C");
  if (merged.contains("epsilon")) s.run.descent.epsilon = get<double>(merged, "epsilon");
  if (merged.contains("budget")) s.run.budget = get<std::uint64_t>(merged, "budget");
  if (merged.contains("neighborhood_bound")) {
    s.run.neighborhood_bound = get<int>(merged, "neighborhood_bound");
  }
  if (merged.contains("active_rule")) {
    const auto rule = get<std::string>(merged, "active_rule");
    if (rule == "protect-max") {
      s.run.descent.active_rule = ActiveSetRule::kBalanceProtectsMax;
    } else if (rule == "protect-all") {
      s.run.descent.active_rule = ActiveSetRule::kBalanceProtectsAll;
    } else {
      throw ConfigError("active_rule must be 'protect-max' or 'protect-all'");
    }
  }
  if (merged.contains("weights")) s.weight_count = get<std::size_t>(merged, "weights");
  if (merged.contains("weights_file")) s.weights_file = get<std::string>(merged, "weights_file");
  if (merged.contains("threads")) s.threads = get<unsigned>(merged, "threads");
  if (merged.contains("verbose")) s.verbose = get<bool>(merged, "verbose");
  if (merged.contains("merge")) {
    const auto merge = get<std::string>(merged, "merge");
    if (merge == "final") {
      s.merge = ScanMerge::kFinal;
    } else if (merge == "trajectory") {
      s.merge = ScanMerge::kTrajectory;
    } else {
      throw ConfigError("merge must be 'final' or 'trajectory'");
    }
  }
  return s;
}

std::string mode_name(DirectionMode mode) { return mode == DirectionMode::kEpo ? "epo" : "ls"; }

struct Paths {
  std::filesystem::path dir;
  [[nodiscard]] std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

Paths prepare_output(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return {dir};
}

template <typename Writer>
void write_with(const std::string& path, Writer&& writer) {
  std::ostringstream text;
  writer(text);
  write_text_file(path, text.str());
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<ObjectiveVector> known_front(const TaskConfig& task) {
  if (task.id == "synthetic") return synthetic_true_front(1000);
  return {};
}

int cmd_run(const Settings& s, const std::string& output, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  TaskFactory factory(s.run.task);
  auto task = factory.make();
  const std::size_t m = task->objective_count();
  Rng pool(s.run.seed);
  const auto x0 = task->random_candidate(pool);
  RunConfig config = s.run;
  config.record_inner = s.verbose;
  config.descent.record_qp = s.verbose;
  const auto result = run_search(*task, config, x0);

  const auto paths = prepare_output(output);
  write_with(paths / "trajectory.csv",
             [&](std::ostream& o) { write_trajectory_csv(o, result.trajectory, m); });
  write_with(paths / "archive.csv", [&](std::ostream& o) { write_archive_csv(o, result.archive); });
  if (result.trajectory.size() >= 2) {
    write_text_file(paths / "theory.json", theory_to_json(result.theory).dump(2));
  } else {
    write_text_file(paths / "theory.json",
                    json{{"steps", 0}, {"note", "fewer than two trajectory records"}}.dump(2));
  }

  const auto points = result.archive.objective_vectors();
  const auto truth = known_front(s.run.task);
  MetricsSummary metrics;
  if (m >= 2 && m <= 4) metrics.hv = hypervolume(points, std::vector<double>(m, 1.0));
  metrics.nu_topk = nonuniformity_report(result.archive, s.run.lambda, 1);
  if (!truth.empty()) metrics.coverage = front_coverage(points, truth);
  metrics.oracle_calls_total = result.oracle_calls;
  metrics.task = s.run.task.id;
  metrics.mode = mode_name(s.run.mode);
  metrics.seed = s.run.seed;
  metrics.archive_size = result.archive.size();
  metrics.failed_rays = result.failed ? 1 : 0;
  metrics.pretraining_calls = factory.pretraining_calls();

  write_with(paths / "front.svg", [&](std::ostream& o) {
    write_front_svg(o, {points, truth, {s.run.lambda}, s.run.task.id + " " + metrics.mode});
  });
  if (s.verbose) {
    write_with(paths / "inner_trace.csv",
               [&](std::ostream& o) { write_inner_trace_csv(o, result.inner_traces, m); });
    json dumps = json::array();
    for (std::size_t t = 0; t < result.inner_traces.size(); ++t) {
      for (const auto& round : result.inner_traces[t]) {
        if (round.qp.is_null()) continue;
        json entry = round.qp;
        entry["outer"] = t + 1;
        entry["inner"] = round.round;
        dumps.push_back(std::move(entry));
      }
    }
    write_text_file(paths / "qp_diagnostics.json", dumps.dump(1));
  }
  metrics.wallclock_ms = elapsed_ms(start);
  write_text_file(paths / "metrics.json", metrics_json(metrics).dump(2));

  const auto& last = result.trajectory.back();
  out << "run " << metrics.task << ' ' << metrics.mode << ": " << result.trajectory.size() - 1
      << " steps, final L = (";
  for (std::size_t i = 0; i < m; ++i) out << (i ? ", " : "") << format_double(last.objectives[i]);
  out << "), mu = " << format_double(last.mu) << ", oracle calls = " << result.oracle_calls
      << '\n';
  if (result.failed) {
    err << "numerical failure: " << result.failure << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

std::vector<WeightVector> scan_weights(const Settings& s, std::size_t m) {
  if (s.weights_file) {
    std::ifstream in(*s.weights_file);
    if (!in) throw ConfigError("cannot read weights file " + *s.weights_file);
    std::vector<WeightVector> weights;
    try {
      weights = read_weights_csv(in);
    } catch (const WeightFileError& e) {
      throw ConfigError(std::string(e.what()));
    }
    for (const auto& w : weights) {
      if (w.size() != m) {
        throw ConfigError("weights file has " + std::to_string(w.size()) +
                          " columns but the task has " + std::to_string(m) + " objectives");
      }
    }
    return weights;
  }
  try {
    return weight_grid(m, *s.weight_count, s.run.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

int cmd_scan(const Settings& s, const std::string& output, std::ostream& out,
             std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  TaskFactory factory(s.run.task);
  const std::size_t m = factory.objectives();
  ScanConfig config;
  config.run = s.run;
  config.weights = scan_weights(s, m);
  config.threads = s.threads;
  config.merge = s.merge;
  config.run.lambda = config.weights.front();
  try {
    config.run.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto scan = front_scan(factory, config);

  const auto paths = prepare_output(output);
  write_with(paths / "archive.csv", [&](std::ostream& o) { write_archive_csv(o, scan.archive); });
  write_with(paths / "weights.csv",
             [&](std::ostream& o) { write_weights_csv(o, config.weights); });
  json theory = json::array();
  for (std::size_t i = 0; i < scan.rays.size(); ++i) {
    const auto& ray = scan.rays[i];
    json entry = ray.result.trajectory.size() >= 2 ? theory_to_json(ray.result.theory) : json{};
    entry["ray"] = i;
    entry["lambda"] = ray.lambda.vec();
    entry["nu"] = ray.nu;
    if (ray.result.failed) entry["failure"] = ray.result.failure;
    theory.push_back(std::move(entry));
  }
  write_text_file(paths / "theory.json", theory.dump(2));

  const auto truth = known_front(s.run.task);
  write_with(paths / "front.svg", [&](std::ostream& o) {
    write_front_svg(o, {scan.archive.objective_vectors(), truth, config.weights,
                        s.run.task.id + " " + mode_name(s.run.mode) + " scan"});
  });

  MetricsSummary metrics;
  metrics.hv = scan.hv;
  metrics.nu_topk = scan.nu_topk;
  metrics.coverage = scan.coverage;
  metrics.oracle_calls_total = scan.oracle_calls_total;
  metrics.task = s.run.task.id;
  metrics.mode = mode_name(s.run.mode);
  metrics.seed = s.run.seed;
  metrics.archive_size = scan.archive.size();
  metrics.rays = scan.rays.size();
  metrics.failed_rays = scan.failed_rays;
  metrics.pretraining_calls = scan.pretraining_calls;
  metrics.wallclock_ms = elapsed_ms(start);
  write_text_file(paths / "metrics.json", metrics_json(metrics).dump(2));

  if (s.verbose) {
    for (std::size_t i = 0; i < scan.rays.size(); ++i) {
      const auto& ray = scan.rays[i];
      out << "ray " << i << ": mu = " << format_double(ray.nu)
          << ", calls = " << ray.result.oracle_calls << (ray.result.failed ? ", FAILED" : "")
          << '\n';
    }
  }
  out << "scan " << metrics.task << ' ' << metrics.mode << ": " << scan.rays.size()
      << " rays, hv = " << format_double(scan.hv) << ", archive = " << scan.archive.size()
      << ", oracle calls = " << scan.oracle_calls_total << '\n';
  if (scan.failed_rays > 0) {
    for (const auto& ray : scan.rays) {
      if (ray.result.failed) err << "ray failed: " << ray.result.failure << '\n';
    }
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_selftest(const std::string& filter, std::ostream& out) {
  const auto rows = run_selftest(filter);
  bool all = true;
  out << std::left << std::setw(9) << "group" << std::setw(44) << "check" << std::setw(6)
      << "result" << " detail\n";
  for (const auto& row : rows) {
    all = all && row.passed;
    out << std::setw(9) << row.group << std::setw(44) << row.name << std::setw(6)
        << (row.passed ? "PASS" : "FAIL") << ' ' << row.detail << '\n';
  }
  if (rows.empty()) out << "no checks match '" << filter << "'\n";
  return all ? kExitOk : kExitConfig;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weight-conditioned Pareto search over discrete candidates"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  struct Flags {
    std::string task, mode, lambda, config, weights_file, merge, active_rule;
    std::uint64_t seed = 0, budget = 0;
    int T = 0, K = 0;
    double eta = 0.0, epsilon = 0.0;
    std::size_t C = 0, weights = 0;
    unsigned threads = 1;
    bool verbose = false;
    std::string output = "out";
    std::string filter;
  } flags;

  std::vector<std::pair<std::string, CLI::Option*>> options;
  auto common = [&](CLI::App* sub) {
    options.emplace_back("task", sub->add_option("--task", flags.task,
                                                 "synthetic | ngram-uni | ngram-bi | surrogate"));
    options.emplace_back("mode", sub->add_option("--mode", flags.mode, "epo | ls"));
    options.emplace_back("seed", sub->add_option("--seed", flags.seed));
    options.emplace_back("T", sub->add_option("-T", flags.T, "outer iterations"));
    options.emplace_back("K", sub->add_option("-K", flags.K, "inner descent rounds"));
    options.emplace_back("eta", sub->add_option("--eta", flags.eta, "inner step size"));
    options.emplace_back("C", sub->add_option("-C", flags.C, "candidates per discretization"));
    options.emplace_back("epsilon", sub->add_option("--epsilon", flags.epsilon,
                                                    "balance/descent switch on mu"));
    options.emplace_back("budget", sub->add_option("--budget", flags.budget,
                                                   "oracle-call cap (0 = unlimited)"));
    options.emplace_back("active_rule",
                         sub->add_option("--active-rule", flags.active_rule,
                                         "protect-max | protect-all"));
    options.emplace_back("verbose", sub->add_flag("--verbose", flags.verbose));
    sub->add_option("--config", flags.config, "JSON file with RunConfig keys");
    sub->add_option("-o,--output", flags.output, "output directory");
  };

  auto* run = app.add_subcommand("run", "single weight-conditioned run");
  common(run);
  options.emplace_back("lambda", run->add_option("--lambda", flags.lambda, "comma-separated weights"));

  auto* scan = app.add_subcommand("scan", "front scan over a weight grid");
  common(scan);
  options.emplace_back("weights", scan->add_option("--weights", flags.weights, "number of weights"));
  options.emplace_back("weights_file", scan->add_option("--weights-file", flags.weights_file));
  options.emplace_back("threads", scan->add_option("--threads", flags.threads));
  options.emplace_back("merge", scan->add_option("--merge", flags.merge, "final | trajectory"));

  auto* selftest = app.add_subcommand("selftest", "quick built-in verification suite");
  selftest->add_option("--filter", flags.filter, "run only checks whose group or name matches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  if (selftest->parsed()) return cmd_selftest(flags.filter, out);

  try {
    json merged = json::object();
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) throw ConfigError("cannot read config file " + flags.config);
      try {
        merged = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file " + flags.config + " is not valid JSON: " + e.what());
      }
      if (!merged.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    if (const char* env = std::getenv("PARETO_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        merged["seed"] = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("PARETO_SEED is not an unsigned integer: ") + env);
      }
    }
    for (const auto& [key, option] : options) {
      if (option->count() == 0) continue;
      if (key == "task") merged[key] = flags.task;
      else if (key == "mode") merged[key] = flags.mode;
      else if (key == "lambda") merged[key] = flags.lambda;
      else if (key == "seed") merged[key] = flags.seed;
      else if (key == "T") merged[key] = flags.T;
      else if (key == "K") merged[key] = flags.K;
      else if (key == "eta") merged[key] = flags.eta;
      else if (key == "C") merged[key] = flags.C;
      else if (key == "epsilon") merged[key] = flags.epsilon;
      else if (key == "budget") merged[key] = flags.budget;
      else if (key == "active_rule") merged[key] = flags.active_rule;
      else if (key == "verbose") merged[key] = flags.verbose;
      else if (key == "weights") merged[key] = flags.weights;
      else if (key == "weights_file") merged[key] = flags.weights_file;
      else if (key == "threads") merged[key] = flags.threads;
      else if (key == "merge") merged[key] = flags.merge;
    }
    const auto settings = resolve(merged);

    std::vector<std::string> missing;
    if (run->parsed() && !settings.have_lambda) missing.push_back("lambda");
    if (scan->parsed() && !settings.weight_count && !settings.weights_file) {
      missing.push_back("weights (or weights_file)");
    }
    if (!missing.empty()) {
      err << "missing required config keys:\n";
      for (const auto& k : missing) err << "  " << k << '\n';
      return kExitConfig;
    }
    if (run->parsed()) {
      try {
        settings.run.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      return cmd_run(settings, flags.output, out, err);
    }
    return cmd_scan(settings, flags.output, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace pinv
