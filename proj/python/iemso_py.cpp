#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iemso/benchmarks.hpp"
#include "iemso/experiment.hpp"
#include "iemso/metrics.hpp"
#include "iemso/process.hpp"

namespace py = pybind11;
using namespace iemso;

namespace {

std::vector<ExploreExploitScore> to_scores(const Matrix& s) {
  require_dim(s, 2, "scores");
  std::vector<ExploreExploitScore> out;
  for (Eigen::Index i = 0; i < s.rows(); ++i) out.push_back({s(i, 0), s(i, 1)});
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

RunConfig make_config(const std::string& problem, std::size_t dim, const std::string& strategy,
                      std::optional<std::size_t> batch_size, std::size_t iterations,
                      std::optional<std::size_t> candidates, std::optional<std::size_t> init_size, std::uint64_t seed,
                      std::size_t runs, const std::string& out, double ucb_beta, std::size_t tree_max_depth,
                      std::size_t tree_min_leaf, const std::string& fi_method, const std::string& exploration) {
  RunConfig c;
  c.problem = problem;
  c.dim = dim;
  c.strategy = parse_strategy(strategy);
  c.batch_size = batch_size;
  c.iterations = iterations;
  c.candidates = candidates;
  c.init_size = init_size;
  c.seed = seed;
  c.runs = runs;
  c.out = out;
  c.ucb_beta = ucb_beta;
  c.tree = {tree_max_depth, tree_min_leaf};
  c.fi_method = parse_importance_method(fi_method);
  c.exploration = parse_exploration_source(exploration);
  return c;
}

}  // namespace

PYBIND11_MODULE(_iemso, m) {
  m.doc() = "Explainability metrics for batch surrogate optimization";
  py::register_exception<Error>(m, "IemsoError", PyExc_ValueError);

  m.def("evaluate", [](const std::string& problem, const Matrix& x) {
    Problem p = make_problem(problem, static_cast<std::size_t>(x.cols()));
    return p.evaluate(x);
  }, py::arg("problem"), py::arg("x"));
  m.def("problem_bounds", [](const std::string& problem, std::size_t dim) {
    const Problem p = make_problem(problem, dim);
    return std::make_pair(Vector(p.bounds().lower()), Vector(p.bounds().upper()));
  });

  m.def("pce", [](const Matrix& points, const Vector& lower, const Vector& upper) {
    const PceResult r = pce(points, Bounds(lower, upper));
    return std::make_pair(r.average, r.per_dim);
  }, py::arg("points"), py::arg("lower"), py::arg("upper"));
  m.def("mdpe", py::overload_cast<const Matrix&, const Matrix&>(&mdpe), py::arg("batch"), py::arg("evaluated"));
  m.def("abd", &abd, py::arg("batch"), py::arg("evaluated"));
  m.def("des", [](const Matrix& batch, bool leave_one_out) { return des(batch, {leave_one_out}).value; },
        py::arg("batch"), py::arg("leave_one_out") = false);
  m.def("dis", [](const Matrix& batch, std::optional<double> bandwidth) {
    const DisResult r = dis(batch, bandwidth);
    return py::dict(py::arg("det") = r.det, py::arg("log_det") = r.log_det, py::arg("bandwidth") = r.bandwidth);
  }, py::arg("batch"), py::arg("bandwidth") = py::none());

  m.def("default_reference", [](const Matrix& scores) {
    const auto r = default_reference(to_scores(scores));
    return std::make_pair(r.r_mu, r.r_sigma);
  }, py::arg("scores"));
  m.def("hve", [](const Matrix& scores, std::pair<double, double> r) {
    return hve(to_scores(scores), {r.first, r.second});
  }, py::arg("scores"), py::arg("reference"));
  m.def("pareto_front", [](const Matrix& scores) { return pareto_front(to_scores(scores)).members; });
  m.def("hypervolume", [](const Matrix& scores, std::pair<double, double> r) {
    const auto s = to_scores(scores);
    return hv_union_2d(pareto_front(s), s, {r.first, r.second});
  }, py::arg("scores"), py::arg("reference"));
  m.def("chee", [](std::size_t index, const Matrix& scores, double observed, std::pair<double, double> r) {
    const CheeValue v = chee(index, to_scores(scores), observed, {r.first, r.second});
    return std::make_pair(v.pre_value, v.post_value);
  }, py::arg("index"), py::arg("scores"), py::arg("observed"), py::arg("reference"));

  m.def("cr", [](const std::vector<double>& observed) { return cr(BestValueSequence(observed)); });
  m.def("os", [](const std::vector<double>& finals) { return os(finals); });

  m.def("gp_predict", [](const Matrix& x, const Vector& y, const Vector& lower, const Vector& upper,
                         const Matrix& query) {
    const GpModel gp = fit_gp({x, y}, Bounds(lower, upper));
    Vector mean, sd;
    gp.predict(query, mean, sd);
    return std::make_pair(mean, sd);
  }, py::arg("x"), py::arg("y"), py::arg("lower"), py::arg("upper"), py::arg("query"));

  m.def("run_experiment", [](const std::string& problem, std::size_t dim, const std::string& strategy,
                             std::optional<std::size_t> batch_size, std::size_t iterations,
                             std::optional<std::size_t> candidates, std::optional<std::size_t> init_size,
                             std::uint64_t seed, std::size_t runs, const std::string& out, double ucb_beta,
                             std::size_t tree_max_depth, std::size_t tree_min_leaf, const std::string& fi_method,
                             const std::string& exploration) {
    const RunConfig c = make_config(problem, dim, strategy, batch_size, iterations, candidates, init_size, seed, runs,
                                    out, ucb_beta, tree_max_depth, tree_min_leaf, fi_method, exploration);
    std::vector<RunResult> results;
    {
      py::gil_scoped_release release;
      results = run_experiment(c);
    }
    py::list out_list;
    for (const auto& r : results) {
      out_list.append(py::dict(py::arg("run_id") = r.run_id, py::arg("seed") = r.seed,
                               py::arg("trace") = r.trace_path.string(), py::arg("evaluations_used") = r.evaluations_used,
                               py::arg("best_y") = r.best_y));
    }
    return out_list;
  }, py::arg("problem"), py::arg("dim"), py::arg("strategy") = "ucb", py::arg("batch_size") = py::none(),
     py::arg("iterations") = 30, py::arg("candidates") = py::none(), py::arg("init_size") = py::none(),
     py::arg("seed") = 0, py::arg("runs") = 1, py::arg("out") = "iemso_out", py::arg("ucb_beta") = 2.0,
     py::arg("tree_max_depth") = 4, py::arg("tree_min_leaf") = 5, py::arg("fi_method") = "permutation",
     py::arg("exploration") = "surrogate");

  m.def("read_trace", [](const std::string& path) {
    py::list out;
    for (const auto& r : read_trace(path)) out.append(json_to_py(to_json(r)));
    return out;
  }, py::arg("path"));
  m.def("export_csv", [](const std::string& trace, const std::string& csv) { export_csv(csv, read_trace(trace)); },
        py::arg("trace"), py::arg("csv"));
  m.def("analyze_csv", [](const std::string& csv, const std::string& out, bool with_surrogate, std::size_t top_k) {
    AnalyzeOptions options;
    options.with_surrogate = with_surrogate;
    const AnalysisResult r = analyze_csv(csv, out, options, top_k);
    return r.warnings;
  }, py::arg("csv"), py::arg("out"), py::arg("with_surrogate") = false, py::arg("top_k") = 10);
  m.def("write_report", [](const std::string& dir, std::size_t top_k) {
    std::vector<std::string> files;
    for (const auto& p : write_report(dir, top_k).written) files.push_back(p.string());
    return files;
  }, py::arg("trace_dir"), py::arg("top_k") = 10);
}
