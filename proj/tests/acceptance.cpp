// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iemso/benchmarks.hpp"
#include "iemso/experiment.hpp"
#include "iemso/importance.hpp"
#include "iemso/metrics.hpp"
#include "iemso/process.hpp"
#include "iemso/random.hpp"
#include "oracles.hpp"

using namespace iemso;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
      failures.push_back(os.str());
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Matrix uniform_points(Eigen::Index n, Eigen::Index d, std::mt19937_64& g, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(g);
  return m;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "iemso_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

void oracle_suite(Check& c) {
  std::mt19937_64 g(20240601);

  const auto t0 = Clock::now();
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index k = 2 + rep % 5;
    const Matrix batch = uniform_points(k, 3, g);
    const DisResult r = dis(batch);
    const double ref = oracle::leibniz_det(oracle::rbf(batch, r.bandwidth, 1e-10));
    c.expect(std::abs(r.det - ref) <= 1e-9 * std::abs(ref), "dis vs Leibniz, batch " + std::to_string(rep));
  }
  c.expect(seconds_since(t0) < 5.0, "dis oracle runtime >= 5 s");

  for (int rep = 0; rep < 10; ++rep) {
    std::vector<ExploreExploitScore> s;
    std::vector<oracle::Pt> pts;
    for (int i = 0; i < 10; ++i) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      s.push_back({u(g), -u(g)});
      pts.push_back({s.back().mu, s.back().sigma});
    }
    const ReferencePoint2D r = default_reference(s);
    const ParetoFront2D front = pareto_front(s);
    const double sweep = hv_union_2d(front, s, r);
    double lo_mu = r.r_mu, lo_sg = r.r_sigma;
    for (const auto& p : s) {
      lo_mu = std::min(lo_mu, p.mu);
      lo_sg = std::min(lo_sg, p.sigma);
    }
    const double mc = oracle::mc_union_area(pts, {r.r_mu, r.r_sigma}, {lo_mu, lo_sg}, 1000000, 100 + rep);
    c.near(sweep, mc, 1e-2, "hv sweep vs Monte-Carlo, front " + std::to_string(rep));

    const std::vector<double> observed{0.3, 0.9, 0.05, 1.5};
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::vector<oracle::Pt> rest;
      for (auto j : front.members)
        if (j != i) rest.push_back(pts[j]);
      const double pre = front.contains(i) ? sweep - oracle::grid_union_area(rest, {r.r_mu, r.r_sigma}) : 0.0;
      const double y = observed[i % observed.size()];
      const CheeValue v = chee(i, s, y, r);
      c.near(v.pre_value, pre, 1e-12, "chee pre vs recompute");

      auto moved = s;
      moved[i].mu = y;
      double post = 0.0;
      if (y <= r.r_mu) {
        const ParetoFront2D f2 = pareto_front(moved);
        if (f2.contains(i)) {
          std::vector<oracle::Pt> all, without;
          for (auto j : f2.members) {
            all.push_back({moved[j].mu, moved[j].sigma});
            if (j != i) without.push_back({moved[j].mu, moved[j].sigma});
          }
          post = oracle::grid_union_area(all, {r.r_mu, r.r_sigma}) -
                 oracle::grid_union_area(without, {r.r_mu, r.r_sigma});
        }
      }
      c.near(v.post_value, post, 1e-12, "chee post vs recompute");
    }
  }

  {
    const Matrix bg = uniform_points(100, 4, g, -1.0, 2.0);
    const Vector w = (Vector(4) << 1.5, -2.0, 0.25, 3.0).finished();
    const PredictFn f = [w](const Matrix& p) { return Vector(p * w); };
    const Matrix xs = uniform_points(5, 4, g, -1.0, 2.0);
    const Eigen::RowVectorXd bbar = bg.colwise().mean();
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      const ShapleyEstimate e = shapley_sampling(f, xs.row(i), bg, 512, RngSeed{static_cast<std::uint64_t>(i)});
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double analytic = w[j] * (xs(i, j) - bbar[j]);
        c.expect(std::abs(e.phi[j] - analytic) <= 3.0 * e.std_error[j] + 1e-12, "linear Shapley within 3 SE");
      }
    }
  }

  {
    std::normal_distribution<double> n01;
    Matrix x(2000, 1);
    for (Eigen::Index i = 0; i < 2000; ++i) x(i, 0) = n01(g);
    c.near(des(x).value, oracle::gaussian_entropy_1d(), 0.1, "des on N(0,1)");
  }

  {
    Matrix x(2, 1);
    x << 0.0, 1.0;
    Vector y(2);
    y << 1.0, 2.0;
    GpConfig cfg;
    cfg.length_scale = 1.0;
    cfg.signal_variance = 1.0;
    const GpModel gp = fit_gp({x, y}, Bounds::uniform(1, 0.0, 1.0), cfg);
    const auto ref = oracle::two_point_gp(0.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1.0, 1e-8);
    Vector m, sd;
    gp.predict(Matrix::Constant(1, 1, 0.5), m, sd);
    c.near(m[0], ref.mean, 1e-9, "gp posterior mean");
    c.near(sd[0] * sd[0], ref.variance, 1e-9, "gp posterior variance");
  }
}

void definition_fixtures(Check& c) {
  c.near(pce(rows({{0, 0}, {0.5, 1}}), Bounds::uniform(2, 0.0, 1.0)).average, 0.75, 1e-12, "pce");
  c.near(mdpe_point(rows({{1, 0}}).row(0), rows({{0, 0}, {2, 0}})), 1.0, 1e-12, "mdpe");
  c.near(abd(rows({{1, 0}, {0, 2}}), rows({{0, 0}})), 1.5, 1e-12, "abd");
  const std::vector<ExploreExploitScore> s{{1, 1}, {2, 2}};
  c.near(hve(s, {3, 3}), 5.0, 1e-12, "hve");
  const std::vector<double> seq{10, 5, 5, 2.5};
  c.near(cr(BestValueSequence(seq)), 1.0 / 3.0, 1e-12, "cr");
  const std::vector<double> finals{1, 3};
  c.near(os(finals), 1.0, 1e-12, "os");
}

void invariant_suite(Check& c) {
  std::mt19937_64 g(77);
  const Bounds unit = Bounds::uniform(3, 0.0, 1.0);
  const Matrix data = uniform_points(30, 3, g);
  Vector y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y[i] = std::sin(5 * data(i, 0)) + data(i, 1);
  const Matrix batch = uniform_points(6, 3, g);
  std::vector<ExploreExploitScore> scores;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 6; ++i) scores.push_back({u(g), -u(g)});
  const ReferencePoint2D r = default_reference(scores);

  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  const Matrix pb = take_rows(batch, perm);
  std::vector<ExploreExploitScore> ps;
  for (auto i : perm) ps.push_back(scores[i]);

  c.near(pce(stack_rows(data, pb), unit).average, pce(stack_rows(data, batch), unit).average, 1e-12, "pce row order");
  const Vector m0 = mdpe(batch, data), m1 = mdpe(pb, data);
  for (std::size_t i = 0; i < perm.size(); ++i)
    c.near(m1[static_cast<Eigen::Index>(i)], m0[static_cast<Eigen::Index>(perm[i])], 1e-12, "mdpe row order");
  c.near(des(pb).value, des(batch).value, 1e-12, "des row order");
  const double d0 = dis(batch).det;
  c.near(dis(pb).det, d0, 1e-9 * std::abs(d0), "dis row order");
  c.near(abd(pb, data), abd(batch, data), 1e-12, "abd row order");
  c.near(hve(ps, r), hve(scores, r), 1e-12, "hve row order");
  for (std::size_t i = 0; i < perm.size(); ++i)
    c.near(hv_contribution(i, ps, r), hv_contribution(perm[i], scores, r), 1e-12, "chee row order");

  Matrix shifted = batch;
  shifted.rowwise() += Eigen::RowVectorXd::Constant(3, 42.0);
  c.near(des(shifted).value, des(batch).value, 1e-9, "des translation");
  const std::vector<double> finals{0.3, 1.7, 2.2, 0.9};
  std::vector<double> moved = finals;
  for (auto& v : moved) v += 1000.0;
  c.near(os(moved), os(finals), 1e-9, "os translation");

  c.near(abd(2.5 * batch, 2.5 * data), 2.5 * abd(batch, data), 1e-12, "abd scale");
  const Vector ms = mdpe(2.5 * batch, 2.5 * data);
  for (Eigen::Index i = 0; i < ms.size(); ++i) c.near(ms[i], 2.5 * m0[i], 1e-12, "mdpe scale");

  const ParetoFront2D front = pareto_front(scores);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!front.contains(i)) c.expect(chee(i, scores, scores[i].mu, r).pre_value == 0.0, "chee off-front is zero");
  }

  const PssaResult ps_res = pssa({data, y}, batch, {3, 3});
  std::size_t total = 0;
  for (auto n : ps_res.batch_counts) total += n;
  c.expect(total == static_cast<std::size_t>(batch.rows()), "pssa counts sum to k");

  const TreeModel tree = fit_tree({data, y}, {3, 3});
  const PredictFn tf = [&tree](const Matrix& p) { return tree.predict(p); };
  for (Eigen::Index i = 0; i < 4; ++i) {
    const ShapleyEstimate e = shapley_sampling(tf, batch.row(i), data, 256, RngSeed{static_cast<std::uint64_t>(i)});
    c.expect(std::abs(e.efficiency_residual()) <= 3.0 * e.total_std_error + 1e-9, "shapley efficiency residual");
  }

  std::vector<double> obs(50);
  for (auto& v : obs) v = u(g) * 10.0 - 5.0;
  const BestValueSequence best(obs);
  for (std::size_t t = 1; t < best.size(); ++t) c.expect(best.values()[t] <= best.values()[t - 1], "best non-increasing");
}

struct ProtocolOutput {
  fs::path levy_dir, ras_dir;
};

bool validate_traces(Check& c, const std::vector<RunResult>& results, std::uint64_t budget, std::size_t k,
                     std::size_t iterations) {
  bool ok = true;
  for (const auto& r : results) {
    std::vector<IterationTrace> recs;
    try {
      recs = read_trace(r.trace_path);
    } catch (const std::exception& e) {
      c.expect(false, std::string("schema: ") + e.what());
      ok = false;
      continue;
    }
    c.expect(recs.size() == iterations + 1, "trace line count " + r.trace_path.string());
    c.expect(r.evaluations_used == budget, "evaluation budget " + r.trace_path.string());
    c.expect(recs.back().metadata.value("evaluations_used", std::uint64_t{0}) == budget, "trace budget field");
    for (std::size_t t = 1; t < recs.size(); ++t) {
      c.expect(recs[t].batch_size() == k, "batch size");
      c.expect(recs[t].best_y <= recs[t - 1].best_y, "best_y non-increasing");
      const auto& m = recs[t].metrics;
      c.expect(m.pce_avg && m.mdpe && m.chee_pre && m.chee_post && m.des && m.dis_logdet && m.abd && m.hve &&
                   m.fiee_eta && m.fiee_lambda,
               "pre/post metrics present at iter " + std::to_string(t));
    }
  }
  return ok;
}

ProtocolOutput protocol_runs(Check& c) {
  ProtocolOutput out{work_dir("levy6"), work_dir("rastrigin10_ucb")};
  const auto t0 = Clock::now();

  RunConfig levy;
  levy.problem = "levy";
  levy.dim = 6;
  levy.batch_size = 4;
  levy.candidates = 1000;
  levy.init_size = 14;
  levy.runs = 10;
  levy.out = out.levy_dir;
  const auto lr = run_experiment(levy);
  validate_traces(c, lr, 14 + 30 * 4, 4, 30);

  RunConfig ras;
  ras.problem = "rastrigin";
  ras.dim = 10;
  ras.batch_size = 8;
  ras.candidates = 1000;
  ras.runs = 10;
  ras.ucb_beta = 0.5;
  ras.out = out.ras_dir;
  const auto rr = run_experiment(ras);
  validate_traces(c, rr, 22 + 30 * 8, 8, 30);

  const double elapsed = seconds_since(t0);
  std::cout << "    protocol runtime " << elapsed << " s\n";
  c.expect(elapsed < 600.0, "protocol runtime >= 10 minutes");
  return out;
}

std::vector<double> mean_abd_per_run(const fs::path& dir, std::size_t runs) {
  std::vector<double> out;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto recs = read_trace(dir / ("run_" + std::to_string(r) + ".jsonl"));
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : recs) {
      if (rec.metrics.abd) {
        sum += *rec.metrics.abd;
        ++n;
      }
    }
    out.push_back(n ? sum / static_cast<double>(n) : 0.0);
  }
  return out;
}

void qualitative(Check& c, const ProtocolOutput& proto) {
  RunConfig mm;
  mm.problem = "rastrigin";
  mm.dim = 10;
  mm.batch_size = 8;
  mm.candidates = 1000;
  mm.runs = 10;
  mm.strategy = Strategy::maximin;
  mm.out = work_dir("rastrigin10_maximin");
  run_experiment(mm);
  const double abd_mm = median(mean_abd_per_run(mm.out, 10));
  const double abd_ucb = median(mean_abd_per_run(proto.ras_dir, 10));
  std::cout << "    rastrigin 10d median mean ABD: maximin " << abd_mm << ", ucb(beta=0.5) " << abd_ucb << '\n';
  c.expect(abd_mm > abd_ucb, "maximin ABD not above ucb ABD");

  RunConfig br;
  br.problem = "branin";
  br.dim = 2;
  br.runs = 10;
  br.out = work_dir("branin_ucb");
  const auto res = run_experiment(br);
  std::vector<double> finals;
  for (const auto& r : res) finals.push_back(r.best_y);
  const double med = median(finals);
  std::cout << "    branin ucb median best_y after 30 iterations " << med << '\n';
  c.expect(med <= 1.4, "branin median best_y > 1.4");
}

void dual_path(Check& c, const fs::path& trace) {
  const auto recs = read_trace(trace);
  const fs::path csv = trace.parent_path() / "export.csv";
  export_csv(csv, recs);
  AnalyzeOptions opt;
  opt.bounds = make_problem(recs.front().metadata["problem"].get<std::string>(),
                            recs.front().metadata["dim"].get<std::size_t>())
                   .bounds();
  const AnalysisResult a = analyze_log(ingest_csv(csv), opt);
  c.expect(a.records.size() == recs.size(), "record count");
  const double tol = 1e-9;
  auto same_opt = [&](const std::optional<double>& x, const std::optional<double>& y, const std::string& what) {
    c.expect(x.has_value() == y.has_value(), what + " presence");
    if (x && y) c.near(*x, *y, tol, what);
  };
  auto same_vec = [&](const std::optional<std::vector<double>>& x, const std::optional<std::vector<double>>& y,
                      const std::string& what) {
    c.expect(x.has_value() == y.has_value(), what + " presence");
    if (x && y) {
      c.expect(x->size() == y->size(), what + " length");
      for (std::size_t i = 0; i < std::min(x->size(), y->size()); ++i) c.near((*x)[i], (*y)[i], tol, what);
    }
  };
  for (std::size_t t = 0; t < std::min(a.records.size(), recs.size()); ++t) {
    const auto& m = recs[t].metrics;
    const auto& n = a.records[t].metrics;
    const std::string at = " @" + std::to_string(t);
    same_opt(m.pce_avg, n.pce_avg, "pce_avg" + at);
    same_vec(m.pce_per_dim, n.pce_per_dim, "pce_per_dim" + at);
    same_vec(m.mdpe, n.mdpe, "mdpe" + at);
    same_opt(m.des, n.des, "des" + at);
    same_opt(m.dis_logdet, n.dis_logdet, "dis_logdet" + at);
    same_opt(m.abd, n.abd, "abd" + at);
    same_opt(m.cr, n.cr, "cr" + at);
    c.near(recs[t].best_y, a.records[t].best_y, tol, "best_y" + at);
    c.expect(m.pssa.has_value() == n.pssa.has_value(), "pssa presence" + at);
    if (m.pssa && n.pssa) {
      c.expect(m.pssa->size() == n.pssa->size(), "pssa size" + at);
      for (std::size_t p = 0; p < std::min(m.pssa->size(), n.pssa->size()); ++p) {
        const auto& e = (*m.pssa)[p];
        const auto& f = (*n.pssa)[p];
        c.expect(e.rule == f.rule && e.n_eval == f.n_eval && e.n_batch == f.n_batch, "pssa entry" + at);
        c.near(e.mean_y, f.mean_y, tol, "pssa mean_y" + at);
      }
    }
  }
}

void determinism(Check& c) {
  RunConfig cfg;
  cfg.problem = "levy";
  cfg.dim = 6;
  cfg.iterations = 6;
  cfg.runs = 2;
  cfg.threads = 2;
  cfg.seed = 1234;
  cfg.strategy = Strategy::pareto;
  cfg.fi_method = ImportanceMethod::shapley;
  cfg.out = work_dir("det_a");
  run_experiment(cfg);
  const fs::path a = cfg.out;
  cfg.out = work_dir("det_b");
  cfg.threads = 1;
  run_experiment(cfg);
  for (int r = 0; r < 2; ++r) {
    const std::string name = "run_" + std::to_string(r) + ".jsonl";
    const std::string x = slurp(a / name), y = slurp(cfg.out / name);
    c.expect(!x.empty() && x == y, name + " differs between executions");
  }
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::string& title, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = Clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " (" << seconds_since(t0)
              << " s)\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures.size(), 10); ++i) {
      std::cout << "      " << c.failures[i] << '\n';
    }
    if (c.failures.size() > 10) std::cout << "      ... " << c.failures.size() - 10 << " more\n";
    std::cout.flush();
  };

  ProtocolOutput proto;
  report(1, "oracle suite", oracle_suite);
  report(2, "definition fixtures", definition_fixtures);
  report(3, "invariant suite", invariant_suite);
  report(4, "protocol runs (levy 6d k=4, rastrigin 10d k=8, 10 seeds each)",
         [&](Check& c) { proto = protocol_runs(c); });
  report(5, "qualitative figure echoes", [&](Check& c) { qualitative(c, proto); });
  report(6, "dual-path equivalence", [&](Check& c) {
    dual_path(c, proto.levy_dir / "run_0.jsonl");
    dual_path(c, proto.ras_dir / "run_3.jsonl");
  });
  report(7, "determinism", determinism);
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
            << '\n';
  return failed ? 1 : 0;
}
