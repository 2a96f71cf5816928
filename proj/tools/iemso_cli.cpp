// iemso: instrumented batch optimization runs, post-hoc log analysis and reports.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iemso/benchmarks.hpp"
#include "iemso/experiment.hpp"
#include "iemso/trace_io.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct RawRun {
  std::string problem = "branin";
  std::size_t dim = 2;
  std::string strategy = "ucb";
  std::size_t batch_size = 0;
  std::size_t iterations = 30;
  std::size_t candidates = 0;
  std::size_t init_size = 0;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::string out = "iemso_out";
  double ucb_beta = 2.0;
  std::size_t tree_max_depth = 4;
  std::size_t tree_min_leaf = 5;
  std::string fi_method = "permutation";
  std::string exploration = "surrogate";
  bool latin_hypercube = false;
  std::size_t threads = 0;
  std::size_t top_k = 10;
};

iemso::RunConfig to_config(const RawRun& raw) {
  iemso::RunConfig c;
  c.problem = raw.problem;
  c.dim = raw.dim;
  c.strategy = iemso::parse_strategy(raw.strategy);
  if (raw.batch_size) c.batch_size = raw.batch_size;
  if (raw.candidates) c.candidates = raw.candidates;
  if (raw.init_size) c.init_size = raw.init_size;
  c.iterations = raw.iterations;
  c.seed = raw.seed;
  c.runs = raw.runs;
  c.out = raw.out;
  c.ucb_beta = raw.ucb_beta;
  c.tree.max_depth = raw.tree_max_depth;
  c.tree.min_leaf = raw.tree_min_leaf;
  c.fi_method = iemso::parse_importance_method(raw.fi_method);
  c.exploration = iemso::parse_exploration_source(raw.exploration);
  c.latin_hypercube = raw.latin_hypercube;
  c.threads = raw.threads;
  c.validate();
  return c;
}

int do_run(const RawRun& raw) {
  iemso::RunConfig config;
  try {
    config = to_config(raw);
  } catch (const iemso::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto results = iemso::run_experiment(config);
    for (const auto& r : results) {
      std::cout << "run " << r.run_id << " seed=" << r.seed << " evaluations=" << r.evaluations_used
                << " best_y=" << r.best_y << " trace=" << r.trace_path.string() << '\n';
    }
    iemso::write_report(config.out, raw.top_k);
  } catch (const iemso::RunError& e) {
    std::cerr << "error: " << e.what() << " (partial trace: " << e.trace_path().string() << ")\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

// `key=value` lines become `--key value` arguments placed right after the
// subcommand, so later command-line flags win. Blank lines and `#` comments are skipped.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw iemso::Error("cannot open config file: " + path);
  std::vector<std::string> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw iemso::Error(path + ":" + std::to_string(number) + ": expected key=value");
    auto trim = [](std::string v) {
      const auto a = v.find_first_not_of(" \t\r\"");
      const auto b = v.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (auto& c : key) c = c == '_' ? '-' : c;
    if (key == "latin-hypercube") {
      if (value == "true" || value == "1") out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty()) return args;
  const auto extra = config_args(config);
  auto sub = std::find(args.begin() + 1, args.end(), "run");
  if (sub == args.end()) throw iemso::Error("--config applies to the run command");
  args.insert(sub + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainability metrics for batch surrogate optimization"};
  app.require_subcommand(1);

  RawRun raw;
  auto* run = app.add_subcommand("run", "Run instrumented optimizations and write traces plus reports");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  run->add_option("--config", config_path, "key=value configuration file; command-line flags take precedence");
  run->add_option("--problem", raw.problem, "branin, rosenbrock, rastrigin or levy")->capture_default_str();
  run->add_option("--dim", raw.dim, "Problem dimension")->capture_default_str();
  run->add_option("--strategy", raw.strategy, "random, ucb, maximin or pareto")->capture_default_str();
  run->add_option("--batch-size", raw.batch_size, "Batch size k (protocol default when omitted)");
  run->add_option("--iterations", raw.iterations, "Iterations T")->capture_default_str();
  run->add_option("--candidates", raw.candidates, "Candidate count m (protocol default when omitted)");
  run->add_option("--init-size", raw.init_size, "Initial design size (2(d+1) when omitted)");
  run->add_option("--seed", raw.seed, "Base seed; run r uses seed + r")->capture_default_str();
  run->add_option("--runs", raw.runs, "Number of runs")->capture_default_str();
  run->add_option("--out", raw.out, "Output directory")->capture_default_str();
  run->add_option("--ucb-beta", raw.ucb_beta, "UCB exploration weight")->capture_default_str();
  run->add_option("--tree-max-depth", raw.tree_max_depth, "Reference tree depth")->capture_default_str();
  run->add_option("--tree-min-leaf", raw.tree_min_leaf, "Reference tree minimum leaf size")->capture_default_str();
  run->add_option("--fi-method", raw.fi_method, "permutation or shapley")->capture_default_str();
  run->add_option("--exploration", raw.exploration, "surrogate or distance")->capture_default_str();
  run->add_flag("--latin-hypercube", raw.latin_hypercube, "Stratified candidate sampling");
  run->add_option("--threads", raw.threads, "Concurrent runs (0 = all cores)");
  run->add_option("--top-k", raw.top_k, "Rows in the top feature tables")->capture_default_str();

  std::string csv_path, analyze_out = "iemso_analysis", analyze_fi = "permutation";
  std::vector<double> lower, upper;
  bool with_surrogate = false;
  std::size_t analyze_top_k = 10, a_depth = 4, a_leaf = 5;
  std::uint64_t analyze_seed = 0;
  auto* analyze = app.add_subcommand("analyze", "Compute metrics for an external optimization log (CSV)");
  analyze->add_option("csv", csv_path, "x1..xd,y or iter,x1..xd,y")->required();
  analyze->add_option("--out", analyze_out, "Output directory")->capture_default_str();
  analyze->add_option("--lower", lower, "Lower bounds (data range when omitted)");
  analyze->add_option("--upper", upper, "Upper bounds (data range when omitted)");
  analyze->add_flag("--with-surrogate", with_surrogate, "Fit the reference GP for surrogate-dependent metrics");
  analyze->add_option("--fi-method", analyze_fi, "permutation or shapley")->capture_default_str();
  analyze->add_option("--tree-max-depth", a_depth)->capture_default_str();
  analyze->add_option("--tree-min-leaf", a_leaf)->capture_default_str();
  analyze->add_option("--seed", analyze_seed)->capture_default_str();
  analyze->add_option("--top-k", analyze_top_k)->capture_default_str();

  std::string report_dir;
  std::size_t report_top_k = 10;
  auto* report = app.add_subcommand("report", "Metric series, top-k feature tables and summary for a trace directory");
  report->add_option("dir", report_dir)->required();
  report->add_option("--top-k", report_top_k)->capture_default_str();

  std::string trace_in, csv_out;
  auto* exp = app.add_subcommand("export", "Write a trace's evaluated batches as iter,x1..xd,y CSV");
  exp->add_option("trace", trace_in)->required();
  exp->add_option("csv", csv_out)->required();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const iemso::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*run) return do_run(raw);

  if (*analyze) {
    iemso::AnalyzeOptions options;
    try {
      if (lower.size() != upper.size()) throw iemso::Error("--lower and --upper must have the same length");
      if (!lower.empty()) {
        options.bounds = iemso::Bounds(Eigen::Map<const iemso::Vector>(lower.data(), static_cast<Eigen::Index>(lower.size())),
                                       Eigen::Map<const iemso::Vector>(upper.data(), static_cast<Eigen::Index>(upper.size())));
      }
      options.with_surrogate = with_surrogate;
      options.fi_method = iemso::parse_importance_method(analyze_fi);
      options.tree = {a_depth, a_leaf};
      options.seed = analyze_seed;
    } catch (const iemso::Error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    }
    try {
      const auto result = iemso::analyze_csv(csv_path, analyze_out, options, analyze_top_k);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "analyzed " << result.records.size() << " iterations into " << analyze_out << '\n';
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeError;
    }
    return 0;
  }

  try {
    if (*report) {
      const auto files = iemso::write_report(report_dir, report_top_k);
      std::cout << "report for " << files.runs << " run(s): " << files.written.size() << " files\n";
    } else {
      iemso::export_csv(csv_out, iemso::read_trace(trace_in));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
