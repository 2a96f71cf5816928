#include <doctest.h>

#include <cmath>
#include <numbers>

#include "iemso/benchmarks.hpp"
#include "iemso/core.hpp"
#include "iemso/random.hpp"

using namespace iemso;

namespace {
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
}  // namespace

TEST_CASE("bounds validation") {
  const Bounds unit = Bounds::uniform(2, 0.0, 1.0);
  CHECK(validate_in_bounds(rows({{0.5, 0.5}}), unit));
  CHECK(validate_in_bounds(rows({{1.0, 0.0}}), unit));
  CHECK_FALSE(validate_in_bounds(rows({{1.1, 0.5}}), unit));
  CHECK_THROWS_AS(Bounds::uniform(2, 1.0, 1.0), Error);
  CHECK_THROWS_AS(validate_in_bounds(rows({{0.5, 0.5, 0.5}}), unit), DimensionError);
}

TEST_CASE("pairwise distances") {
  CHECK(pairwise_distance(rows({{0, 0}}), rows({{3, 4}}))(0, 0) == doctest::Approx(5.0));
  CHECK(pairwise_distance(rows({{1, 2}}), rows({{1, 2}}))(0, 0) == 0.0);
  const Matrix d = pairwise_distance(rows({{0, 0}, {1, 0}}), rows({{0, 1}}));
  CHECK(d.rows() == 2);
  CHECK(d(0, 0) == doctest::Approx(1.0));
  CHECK(d(1, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(pairwise_distance(rows({{0, 0}}), rows({{0, 0, 0}})), DimensionError);
}

TEST_CASE("evaluated set append") {
  EvaluatedSet s;
  s.append(rows({{0, 0}}), Vector::Constant(1, 2.0));
  s.append(rows({{1, 1}, {2, 2}}), Vector::Constant(2, 3.0));
  CHECK(s.size() == 3);
  CHECK_THROWS_AS(s.append(rows({{1, 1, 1}}), Vector::Constant(1, 0.0)), DimensionError);
}

TEST_CASE("seed derivation is stable and label sensitive") {
  const RngSeed base{42};
  CHECK(derive_seed(base, "a").value == derive_seed(base, "a").value);
  CHECK(derive_seed(base, "a").value != derive_seed(base, "b").value);
  CHECK(derive_seed(base, "a", 1).value != derive_seed(base, "a", 2).value);
  Rng rng(base);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
  auto perm = Rng(base).permutation(10);
  std::sort(perm.begin(), perm.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(perm[i] == i);
}

TEST_CASE("problem construction") {
  const Problem levy = make_problem("levy", 6);
  CHECK(levy.dim() == 6);
  CHECK(levy.bounds().lower().isApprox(Vector::Constant(6, -10.0)));
  CHECK(levy.bounds().upper().isApprox(Vector::Constant(6, 10.0)));
  const Problem ras = make_problem("rastrigin", 10);
  CHECK(ras.bounds().upper()[9] == doctest::Approx(5.12));
  CHECK_THROWS_AS(make_problem("branin", 3), Error);
  CHECK_THROWS_AS(make_problem("sphere", 2), Error);
}

TEST_CASE("known minima") {
  Problem ras = make_problem("rastrigin", 10);
  CHECK(ras.value(Eigen::RowVectorXd::Zero(10)) == doctest::Approx(0.0));
  Problem levy = make_problem("levy", 6);
  CHECK(std::abs(levy.value(Eigen::RowVectorXd::Ones(6))) < 1e-12);
  Problem branin = make_problem("branin", 2);
  Eigen::RowVectorXd x(2);
  x << std::numbers::pi, 2.275;
  CHECK(std::abs(branin.value(x) - 0.397887) < 1e-5);
  Problem rosen = make_problem("rosenbrock", 3);
  CHECK(rosen.value(Eigen::RowVectorXd::Ones(3)) == 0.0);
}

TEST_CASE("evaluation counter only counts successful calls") {
  Problem p = make_problem("branin", 2);
  p.evaluate(rows({{0, 0}, {1, 1}}));
  CHECK(p.evaluations_used() == 2);
  CHECK_THROWS_AS(p.evaluate(rows({{0, 0}, {11, 1}})), Error);
  CHECK(p.evaluations_used() == 2);
}

TEST_CASE("candidate sampling") {
  const Bounds unit = Bounds::uniform(2, 0.0, 1.0);
  const Matrix a = sample_candidates(unit, 100, RngSeed{7});
  const Matrix b = sample_candidates(unit, 100, RngSeed{7});
  CHECK(a.rows() == 100);
  CHECK(a == b);
  CHECK(validate_in_bounds(a, unit));
  CHECK(sample_candidates(make_problem("rastrigin", 10).bounds(), 1000, RngSeed{1}).rows() == 1000);
  const Matrix lhs = sample_candidates(unit, 10, RngSeed{3}, true);
  for (Eigen::Index j = 0; j < 2; ++j) {
    std::vector<int> bins(10, 0);
    for (Eigen::Index i = 0; i < 10; ++i) ++bins[static_cast<std::size_t>(lhs(i, j) * 10.0)];
    for (int c : bins) CHECK(c == 1);
  }
}
