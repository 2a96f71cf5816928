#include "iemso/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "iemso/benchmarks.hpp"
#include "iemso/metrics.hpp"
#include "iemso/process.hpp"
#include "iemso/random.hpp"

namespace iemso {

using nlohmann::json;

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json bounds_json(const Bounds& b) { return {{"lower", to_std(b.lower())}, {"upper", to_std(b.upper())}}; }

// Metrics that depend only on point coordinates.
void fill_geometry(IterationMetrics& m, const Matrix& evaluated, const Matrix& batch, const Bounds& bounds) {
  const PceResult coverage = pce(stack_rows(evaluated, batch), bounds);
  m.pce_avg = coverage.average;
  m.pce_per_dim = to_std(coverage.per_dim);
  if (batch.rows() >= 2) m.des = des(batch).value;
  m.dis_logdet = dis(batch).log_det;
  if (evaluated.rows() > 0) {
    m.mdpe = to_std(mdpe(batch, evaluated));
    m.abd = abd(batch, evaluated);
  }
}

void fill_pssa(IterationMetrics& m, const EvaluatedSet& data, const Matrix& batch, const TreeParams& tree) {
  if (data.size() < 2 * tree.min_leaf) return;
  const PssaResult res = pssa(data, batch, tree);
  std::vector<PssaEntry> entries;
  for (std::size_t p = 0; p < res.partitions.size(); ++p) {
    const auto& part = res.partitions[p];
    entries.push_back({part.rule_string(), part.stats.count, part.stats.mean, res.batch_counts[p]});
  }
  m.pssa = std::move(entries);
}

// Reference-tree importance (FIBB) and tree-surrogate Shapley means (FIS).
void fill_tree_importance(IterationMetrics& m, const EvaluatedSet& data, const ImportanceSettings& settings,
                          const TreeParams& tree_params, RngSeed seed) {
  if (data.size() < 2 * tree_params.min_leaf || data.size() < 5) return;
  m.fibb = to_std(fibb(data, settings, tree_params, derive_seed(seed, "fibb")).scores);
  const TreeModel tree = fit_tree(data, tree_params);
  const Matrix background = capped_rows(data.points(), settings.background_cap, derive_seed(seed, "background"));
  const Matrix explained = capped_rows(data.points(), settings.explained_cap, derive_seed(seed, "explained"));
  const FisResult f = fis(tree, explained, background, settings.shapley_samples, derive_seed(seed, "fis"));
  m.fis_signed = to_std(f.signed_mean);
  m.fis_abs = to_std(f.abs_mean);
}

std::optional<double> try_cr(const BestValueSequence& best) {
  if (best.size() < 2) return std::nullopt;
  try {
    return cr(best);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<double> contributions_post(const std::vector<std::size_t>& indices,
                                       const std::vector<ExploreExploitScore>& scores, const Vector& observed,
                                       const ReferencePoint2D& r, std::vector<double>* pre) {
  std::vector<double> post;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const CheeValue v = chee(indices[i], scores, observed[static_cast<Eigen::Index>(i)], r);
    if (pre) pre->push_back(v.pre_value);
    post.push_back(v.post_value);
  }
  return post;
}

}  // namespace

std::pair<std::size_t, std::size_t> protocol_defaults(std::size_t dim) {
  if (dim <= 2) return {4, 100};
  if (dim < 10) return {4, 1000};
  return {8, 1000};
}

std::size_t RunConfig::effective_batch_size() const { return batch_size.value_or(protocol_defaults(dim).first); }
std::size_t RunConfig::effective_candidates() const { return candidates.value_or(protocol_defaults(dim).second); }
std::size_t RunConfig::effective_init_size() const { return init_size.value_or(2 * (dim + 1)); }

void RunConfig::validate() const {
  (void)make_problem(problem, dim);
  if (effective_batch_size() == 0) throw Error("batch size must be positive");
  if (effective_candidates() < effective_batch_size()) throw Error("candidate count must be at least the batch size");
  if (effective_init_size() < 2) throw Error("init size must be at least 2");
  if (runs == 0) throw Error("runs must be at least 1");
  if (tree.max_depth == 0 || tree.min_leaf == 0) throw Error("tree parameters must be positive");
  if (!(ucb_beta >= 0.0)) throw Error("ucb beta must be non-negative");
}

RunResult run_single(const RunConfig& config, std::size_t run) {
  config.validate();
  Problem problem = make_problem(config.problem, config.dim);
  const Bounds& bounds = problem.bounds();
  const std::size_t k = config.effective_batch_size();
  const std::size_t m = config.effective_candidates();
  const std::size_t init_size = config.effective_init_size();
  const RngSeed base{config.seed + run};

  RunResult result;
  result.run_id = std::to_string(run);
  result.seed = base.value;
  std::filesystem::create_directories(config.out);
  result.trace_path = config.out / ("run_" + result.run_id + ".jsonl");
  TraceWriter writer(result.trace_path);

  ImportanceSettings settings;
  settings.method = config.fi_method;

  try {
    const Matrix init = sample_candidates(bounds, init_size, derive_seed(base, "init"), config.latin_hypercube);
    const Vector y0 = problem.evaluate(init);
    EvaluatedSet data(init, y0);
    BestValueSequence best;
    best.push(y0.minCoeff());

    IterationTrace rec0;
    rec0.run_id = result.run_id;
    rec0.seed = base.value;
    rec0.iter = 0;
    rec0.batch = init;
    rec0.batch_y = to_std(y0);
    rec0.best_y = best.values().back();
    fill_geometry(rec0.metrics, Matrix(0, init.cols()), init, bounds);
    rec0.metadata = {{"problem", problem.name()},
                     {"dim", config.dim},
                     {"strategy", to_string(config.strategy)},
                     {"batch_size", k},
                     {"candidates", m},
                     {"init_size", init_size},
                     {"iterations", config.iterations},
                     {"ucb_beta", config.ucb_beta},
                     {"tree_max_depth", config.tree.max_depth},
                     {"tree_min_leaf", config.tree.min_leaf},
                     {"fi_method", to_string(config.fi_method)},
                     {"exploration", to_string(config.exploration)},
                     {"candidate_sampling", config.latin_hypercube ? "latin_hypercube" : "uniform"},
                     {"surrogate", "gp_squared_exponential_median_heuristic"},
                     {"fibb_model", "regression_tree"},
                     {"fis_model", "regression_tree"},
                     {"bounds", bounds_json(bounds)},
                     {"evaluations_used", problem.evaluations_used()}};
    writer.write(rec0);

    for (std::size_t t = 1; t <= config.iterations; ++t) {
      const RngSeed iter_seed = derive_seed(base, "iteration", t);
      const Matrix candidates = sample_candidates(bounds, m, derive_seed(iter_seed, "candidates"), config.latin_hypercube);
      const GpModel gp = fit_gp(data, bounds);

      Selection sel;
      switch (config.strategy) {
        case Strategy::random: sel = select_random(candidates, k, derive_seed(iter_seed, "random")); break;
        case Strategy::ucb: sel = select_greedy_ucb(gp, data, candidates, k, config.ucb_beta); break;
        case Strategy::maximin: sel = select_maximin(data.points(), candidates, k); break;
        case Strategy::pareto: sel = select_pareto(gp, data, candidates, k); break;
      }

      IterationTrace rec;
      rec.run_id = result.run_id;
      rec.seed = base.value;
      rec.iter = t;
      rec.batch = sel.points;
      auto& metrics = rec.metrics;

      // Before the expensive evaluation.
      fill_geometry(metrics, data.points(), sel.points, bounds);
      fill_pssa(metrics, data, sel.points, config.tree);

      Vector mean, sd;
      gp.predict(candidates, mean, sd);
      const Vector explore =
          config.exploration == ExplorationSource::surrogate ? sd : distance_exploration(data.points(), candidates);
      std::vector<ExploreExploitScore> scores(static_cast<std::size_t>(candidates.rows()));
      for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
        scores[static_cast<std::size_t>(i)] = ExploreExploitScore::from_raw(mean[i], explore[i]);
      }
      const ReferencePoint2D ref = default_reference(scores);
      metrics.ref_point = std::array<double, 2>{ref.r_mu, ref.r_sigma};
      std::vector<ExploreExploitScore> batch_scores;
      for (auto i : sel.indices) batch_scores.push_back(scores[i]);
      metrics.hve = hve(batch_scores, ref);

      if (data.size() >= 5) {
        const FieeResult fe = fiee(gp, data, settings, config.exploration, derive_seed(iter_seed, "fiee"));
        metrics.fiee_eta = to_std(fe.eta.scores);
        metrics.fiee_lambda = to_std(fe.lambda.scores);
      }
      fill_tree_importance(metrics, data, settings, config.tree, iter_seed);

      // The expensive evaluation and what follows it.
      const Vector y = problem.evaluate(sel.points);
      std::vector<double> pre;
      metrics.chee_post = contributions_post(sel.indices, scores, y, ref, &pre);
      metrics.chee_pre = std::move(pre);
      data.append(sel.points, y);
      best.push(y.minCoeff());
      metrics.cr = try_cr(best);

      rec.batch_y = to_std(y);
      rec.best_y = best.values().back();
      rec.metadata = {{"evaluations_used", problem.evaluations_used()},
                      {"gp_length_scale", gp.length_scale()},
                      {"gp_signal_variance", gp.signal_variance()}};
      writer.write(rec);
    }

    const std::uint64_t expected = init_size + config.iterations * k;
    if (problem.evaluations_used() != expected) {
      std::ostringstream os;
      os << "evaluation accounting mismatch: used " << problem.evaluations_used() << ", expected " << expected;
      throw Error(os.str());
    }
    result.evaluations_used = problem.evaluations_used();
    result.best_y = best.values().back();
  } catch (const Error& e) {
    throw RunError("run " + result.run_id + " failed: " + e.what(), result.trace_path);
  }
  return result;
}

std::vector<RunResult> run_experiment(const RunConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out);
  std::vector<RunResult> results(config.runs);
  std::vector<std::exception_ptr> errors(config.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < config.runs; r = next++) {
      try {
        results[r] = run_single(config, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

AnalysisResult analyze_log(const ExternalLog& log, const AnalyzeOptions& options) {
  if (log.iterations.empty()) throw Error("analyze_log: empty log");
  const std::size_t d = log.dim();
  Matrix all(0, static_cast<Eigen::Index>(d));
  for (const auto& it : log.iterations) all = stack_rows(all, it.points());
  const Bounds bounds = options.bounds ? *options.bounds : (log.bounds ? *log.bounds : bounds_from_data(all));
  require_dim(all, bounds.dim(), "analyze_log bounds");

  ImportanceSettings settings;
  settings.method = options.fi_method;
  const RngSeed base{options.seed};

  AnalysisResult out;
  EvaluatedSet data;
  BestValueSequence best;
  for (std::size_t t = 0; t < log.iterations.size(); ++t) {
    const EvaluatedSet& step = log.iterations[t];
    const Matrix& batch = step.points();
    const RngSeed iter_seed = derive_seed(base, "iteration", t);

    IterationTrace rec;
    rec.run_id = options.run_id;
    rec.seed = options.seed;
    rec.iter = t;
    rec.batch = batch;
    rec.batch_y = to_std(step.values());
    auto& metrics = rec.metrics;

    const Matrix evaluated = data.empty() ? Matrix(0, static_cast<Eigen::Index>(d)) : data.points();
    fill_geometry(metrics, evaluated, batch, bounds);
    if (batch.rows() < 2) out.warnings.push_back("iteration " + std::to_string(t) + ": des needs at least 2 points");

    if (data.empty()) {
      out.warnings.push_back("iteration " + std::to_string(t) +
                             ": no prior evaluations; mdpe, abd, hve and chee recorded as null");
    } else {
      fill_pssa(metrics, data, batch, options.tree);
      const Vector dist = distance_exploration(data.points(), batch);
      std::vector<ExploreExploitScore> scores;
      std::optional<GpModel> gp;
      if (options.with_surrogate && data.size() >= 2) {
        gp = fit_gp(data, bounds);
        Vector mean, sd;
        gp->predict(batch, mean, sd);
        for (Eigen::Index i = 0; i < batch.rows(); ++i) scores.push_back(ExploreExploitScore::from_raw(mean[i], sd[i]));
      } else {
        for (Eigen::Index i = 0; i < batch.rows(); ++i) {
          scores.push_back(ExploreExploitScore::from_raw(step.values()[i], dist[i]));
        }
      }
      const ReferencePoint2D ref = default_reference(scores);
      metrics.ref_point = std::array<double, 2>{ref.r_mu, ref.r_sigma};
      metrics.hve = hve(scores, ref);
      std::vector<std::size_t> indices(static_cast<std::size_t>(batch.rows()));
      for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
      std::vector<double> pre;
      metrics.chee_post = contributions_post(indices, scores, step.values(), ref, gp ? &pre : nullptr);
      if (gp) {
        metrics.chee_pre = std::move(pre);
        if (data.size() >= 5) {
          const FieeResult fe = fiee(*gp, data, settings, ExplorationSource::surrogate, derive_seed(iter_seed, "fiee"));
          metrics.fiee_eta = to_std(fe.eta.scores);
          metrics.fiee_lambda = to_std(fe.lambda.scores);
        }
      }
      if (options.with_surrogate) {
        fill_tree_importance(metrics, data, settings, options.tree, iter_seed);
      } else if (data.size() >= 2 * options.tree.min_leaf && data.size() >= 5) {
        metrics.fibb = to_std(fibb(data, settings, options.tree, derive_seed(iter_seed, "fibb")).scores);
      }
    }

    data.append(batch, step.values());
    best.push(step.values().minCoeff());
    metrics.cr = try_cr(best);
    rec.best_y = best.values().back();
    if (t == 0) {
      rec.metadata = {{"mode", "post_hoc"},
                      {"dim", d},
                      {"iterations", log.iterations.size()},
                      {"surrogate", options.with_surrogate ? "gp_squared_exponential_median_heuristic" : "none"},
                      {"exploration", options.with_surrogate ? "surrogate" : "distance"},
                      {"fi_method", to_string(options.fi_method)},
                      {"fibb_model", "regression_tree"},
                      {"tree_max_depth", options.tree.max_depth},
                      {"tree_min_leaf", options.tree.min_leaf},
                      {"bounds", bounds_json(bounds)}};
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

AnalysisResult analyze_csv(const std::filesystem::path& csv, const std::filesystem::path& out,
                           const AnalyzeOptions& options, std::size_t top_k) {
  const ExternalLog log = ingest_csv(csv);
  AnalysisResult result = analyze_log(log, options);
  std::filesystem::create_directories(out);
  write_trace(out / ("run_" + options.run_id + ".jsonl"), result.records);
  write_report(out, top_k);
  return result;
}

const std::vector<std::string>& report_series() {
  static const std::vector<std::string> names = {"best_y", "pce_avg", "mdpe",  "chee_pre", "chee_post", "des",
                                                 "dis_logdet", "abd", "hve", "cr"};
  return names;
}

namespace {

std::optional<double> sum_of(const std::optional<std::vector<double>>& v) {
  if (!v || v->empty()) return std::nullopt;
  double s = 0.0;
  for (double x : *v) s += x;
  return s;
}

// Scalar view of one series: batch arrays reduce to a mean (mdpe) or a sum
// (chee contributions).
std::optional<double> series_value(const IterationTrace& r, const std::string& name) {
  const auto& m = r.metrics;
  if (name == "best_y") return r.best_y;
  if (name == "pce_avg") return m.pce_avg;
  if (name == "mdpe") {
    auto s = sum_of(m.mdpe);
    if (s) *s /= static_cast<double>(m.mdpe->size());
    return s;
  }
  if (name == "chee_pre") return sum_of(m.chee_pre);
  if (name == "chee_post") return sum_of(m.chee_post);
  if (name == "des") return m.des;
  if (name == "dis_logdet") return m.dis_logdet;
  if (name == "abd") return m.abd;
  if (name == "hve") return m.hve;
  if (name == "cr") return m.cr;
  return std::nullopt;
}

const std::optional<std::vector<double>>& feature_vector(const IterationMetrics& m, const std::string& name) {
  if (name == "fiee_eta") return m.fiee_eta;
  if (name == "fiee_lambda") return m.fiee_lambda;
  if (name == "fibb") return m.fibb;
  if (name == "fis_signed") return m.fis_signed;
  return m.fis_abs;
}

}  // namespace

ReportFiles write_report(const std::filesystem::path& trace_dir, std::size_t top_k) {
  std::vector<std::pair<std::string, std::filesystem::path>> files;
  if (std::filesystem::is_directory(trace_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(trace_dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("run_") && name.ends_with(".jsonl")) {
        files.emplace_back(name.substr(4, name.size() - 10), entry.path());
      }
    }
  }
  if (files.empty()) throw Error("report: no run_*.jsonl traces in " + trace_dir.string());
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::sort(files.begin(), files.end(), [&](const auto& a, const auto& b) {
    if (numeric(a.first) && numeric(b.first)) return std::stoull(a.first) < std::stoull(b.first);
    return a.first < b.first;
  });

  std::vector<std::vector<IterationTrace>> runs;
  for (const auto& [id, path] : files) {
    runs.push_back(read_trace(path));
    if (runs.back().empty()) throw Error("report: empty trace " + path.string());
  }

  ReportFiles report;
  report.runs = runs.size();

  std::vector<std::uint64_t> iters;
  for (const auto& run : runs) {
    for (const auto& rec : run) iters.push_back(rec.iter);
  }
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());

  for (const auto& series : report_series()) {
    const auto path = trace_dir / ("metric_" + series + ".csv");
    std::ofstream out(path, std::ios::trunc);
    out << "iter";
    for (const auto& f : files) out << ",run_" << f.first;
    out << '\n';
    for (auto it : iters) {
      out << it;
      for (const auto& run : runs) {
        out << ',';
        const auto rec = std::find_if(run.begin(), run.end(), [&](const IterationTrace& r) { return r.iter == it; });
        if (rec != run.end()) {
          if (const auto v = series_value(*rec, series)) out << format_double(*v);
        }
      }
      out << '\n';
    }
    if (!out) throw Error("report: failed to write " + path.string());
    report.written.push_back(path);
  }

  for (const std::string name : {"fiee_eta", "fiee_lambda", "fibb", "fis_signed", "fis_abs"}) {
    Vector total;
    std::size_t count = 0;
    for (const auto& run : runs) {
      // Final iteration that carries the vector.
      for (auto rec = run.rbegin(); rec != run.rend(); ++rec) {
        const auto& v = feature_vector(rec->metrics, name);
        if (!v) continue;
        const Vector vec = Eigen::Map<const Vector>(v->data(), static_cast<Eigen::Index>(v->size()));
        if (count == 0) total = vec;
        else if (total.size() == vec.size()) total += vec;
        ++count;
        break;
      }
    }
    if (count == 0) continue;
    total /= static_cast<double>(count);
    std::vector<std::size_t> order(static_cast<std::size_t>(total.size()));
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(total[static_cast<Eigen::Index>(a)]) > std::abs(total[static_cast<Eigen::Index>(b)]);
    });
    const auto path = trace_dir / ("top_" + name + ".csv");
    std::ofstream out(path, std::ios::trunc);
    out << "rank,feature,score\n";
    for (std::size_t r = 0; r < std::min(top_k, order.size()); ++r) {
      out << r + 1 << ",x" << order[r] + 1 << ',' << format_double(total[static_cast<Eigen::Index>(order[r])]) << '\n';
    }
    if (!out) throw Error("report: failed to write " + path.string());
    report.written.push_back(path);
  }

  json summary;
  if (runs.size() >= 2) {
    summary = to_json(aggregate_runs(runs));
  } else {
    std::vector<double> best;
    for (const auto& rec : runs.front()) best.push_back(rec.best_y);
    const auto c = try_cr(BestValueSequence(best));
    summary = {{"runs", 1}, {"final_best_y", {runs.front().back().best_y}}, {"cr_per_run", {c ? json(*c) : json(nullptr)}},
               {"cr_mean", c ? json(*c) : json(nullptr)}};
  }
  std::vector<std::string> ids;
  for (const auto& f : files) ids.push_back(f.first);
  summary["run_ids"] = ids;
  summary["top_k"] = top_k;
  const auto path = trace_dir / "summary.json";
  std::ofstream out(path, std::ios::trunc);
  out << summary.dump(2) << '\n';
  if (!out) throw Error("report: failed to write " + path.string());
  report.written.push_back(path);
  return report;
}

}  // namespace iemso
