#include "iemso/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "iemso/random.hpp"

namespace iemso {

namespace {

constexpr double kPi = std::numbers::pi;

Bounds standard_bounds(Family family, std::size_t dim) {
  switch (family) {
    case Family::branin: {
      Vector lo(2), hi(2);
      lo << -5.0, 0.0;
      hi << 10.0, 15.0;
      return Bounds(lo, hi);
    }
    case Family::rosenbrock:
      return Bounds::uniform(dim, -5.0, 10.0);
    case Family::rastrigin:
      return Bounds::uniform(dim, -5.12, 5.12);
    case Family::levy:
      return Bounds::uniform(dim, -10.0, 10.0);
  }
  throw Error("unknown problem family");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::branin: return "branin";
    case Family::rosenbrock: return "rosenbrock";
    case Family::rastrigin: return "rastrigin";
    case Family::levy: return "levy";
  }
  return "unknown";
}

void check_dim(Family family, std::size_t dim) {
  const bool ok = (family == Family::branin && dim == 2) || (family == Family::rosenbrock && dim >= 2) ||
                  ((family == Family::rastrigin || family == Family::levy) && dim >= 1);
  if (!ok) {
    std::ostringstream os;
    os << family_name(family) << ": illegal dimension " << dim;
    if (family == Family::branin) os << " (branin is 2-dimensional only)";
    if (family == Family::rosenbrock) os << " (rosenbrock requires d >= 2)";
    throw Error(os.str());
  }
}

double branin(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double t = 1.0 / (8.0 * kPi);
  const double inner = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return inner * inner + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

double rosenbrock(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

double rastrigin(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double sum = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += x[i] * x[i] - 10.0 * std::cos(2.0 * kPi * x[i]);
  return sum;
}

double levy(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const auto d = x.size();
  auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  const double s0 = std::sin(kPi * w(0));
  double sum = s0 * s0;
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    const double s = std::sin(kPi * wi + 1.0);
    sum += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
  }
  const double wd = w(d - 1);
  const double sd = std::sin(2.0 * kPi * wd);
  sum += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
  return sum;
}

}  // namespace

Problem::Problem(Family family, std::size_t dim)
    : family_(family), name_(family_name(family)), bounds_((check_dim(family, dim), standard_bounds(family, dim))) {}

Problem::Problem(const Problem& other)
    : family_(other.family_), name_(other.name_), bounds_(other.bounds_), evaluations_(other.evaluations_.load()) {}

double Problem::value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  switch (family_) {
    case Family::branin: return branin(x);
    case Family::rosenbrock: return rosenbrock(x);
    case Family::rastrigin: return rastrigin(x);
    case Family::levy: return levy(x);
  }
  throw Error("unknown problem family");
}

Vector Problem::evaluate(const Matrix& points) {
  require_dim(points, dim(), "evaluate");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double v = points(i, j);
      if (!(v >= bounds_.lower()[j] && v <= bounds_.upper()[j])) {
        std::ostringstream os;
        os << name_ << ": point at row " << i << " is out of bounds in coordinate " << j + 1 << " (value " << v
           << ", allowed [" << bounds_.lower()[j] << ", " << bounds_.upper()[j] << "])";
        throw Error(os.str());
      }
    }
  }
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = value(points.row(i));
  evaluations_.fetch_add(static_cast<std::uint64_t>(points.rows()));
  return out;
}

Vector Problem::minimizer() const {
  const auto d = static_cast<Eigen::Index>(dim());
  switch (family_) {
    case Family::branin: {
      Vector x(2);
      x << kPi, 2.275;
      return x;
    }
    case Family::rosenbrock:
    case Family::levy:
      return Vector::Ones(d);
    case Family::rastrigin:
      return Vector::Zero(d);
  }
  throw Error("unknown problem family");
}

double Problem::minimum() const {
  return family_ == Family::branin ? 0.397887357729738 : 0.0;
}

Problem make_problem(const std::string& name, std::size_t dim) {
  if (name == "branin") return Problem(Family::branin, dim);
  if (name == "rosenbrock") return Problem(Family::rosenbrock, dim);
  if (name == "rastrigin") return Problem(Family::rastrigin, dim);
  if (name == "levy") return Problem(Family::levy, dim);
  throw Error("unknown problem '" + name + "' (expected branin, rosenbrock, rastrigin or levy)");
}

std::vector<std::string> problem_names() { return {"branin", "rosenbrock", "rastrigin", "levy"}; }

Matrix sample_candidates(const Bounds& bounds, std::size_t m, RngSeed seed, bool latin_hypercube) {
  if (m == 0) throw Error("sample_candidates: m must be positive");
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(bounds.dim());
  const auto rows = static_cast<Eigen::Index>(m);
  Matrix out(rows, d);
  if (!latin_hypercube) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) out(i, j) = rng.uniform(bounds.lower()[j], bounds.upper()[j]);
    }
    return out;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto strata = rng.permutation(m);
    const double width = bounds.upper()[j] - bounds.lower()[j];
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + rng.uniform()) / static_cast<double>(m);
      out(i, j) = bounds.lower()[j] + width * u;
    }
  }
  return out;
}

}  // namespace iemso
