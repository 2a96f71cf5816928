#include <doctest.h>

#include <cmath>
#include <random>

#include "iemso/metrics.hpp"
#include "oracles.hpp"

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
std::vector<ExploreExploitScore> scores(std::initializer_list<std::pair<double, double>> s) {
  std::vector<ExploreExploitScore> out;
  for (auto [m, sg] : s) out.push_back({m, sg});
  return out;
}
Matrix random_matrix(Eigen::Index n, Eigen::Index d, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(g);
  return m;
}
}  // namespace

TEST_CASE("pce") {
  const Bounds unit = Bounds::uniform(2, 0.0, 1.0);
  auto full = pce(rows({{0, 0}, {1, 1}}), unit);
  CHECK(full.per_dim[0] == 1.0);
  CHECK(full.average == 1.0);
  auto single = pce(rows({{0.3, 0.7}}), unit);
  CHECK(single.average == 0.0);
  auto half = pce(rows({{0, 0}, {0.5, 1}}), unit);
  CHECK(half.per_dim[0] == doctest::Approx(0.5));
  CHECK(std::abs(half.average - 0.75) < 1e-12);
  CHECK_THROWS_AS(pce(Matrix(0, 2), unit), Error);
}

TEST_CASE("mdpe") {
  CHECK(mdpe_point(rows({{1, 2}}).row(0), rows({{1, 2}})) == 0.0);
  CHECK(mdpe_point(rows({{3, 4}}).row(0), rows({{0, 0}})) == doctest::Approx(5.0));
  CHECK(std::abs(mdpe_point(rows({{1, 0}}).row(0), rows({{0, 0}, {2, 0}})) - 1.0) < 1e-12);
  CHECK_THROWS_AS(mdpe(rows({{1, 0}}), Matrix(0, 2)), Error);
}

TEST_CASE("pareto front") {
  CHECK(pareto_front(scores({{3, 3}})).members == std::vector<std::size_t>{0});
  CHECK(pareto_front(scores({{1, 2}, {2, 1}, {2, 2}})).members == std::vector<std::size_t>{0, 1});
  CHECK(pareto_front(scores({{1, 1}, {1, 1}, {1, 1}})).members == std::vector<std::size_t>{0});
  const auto layers = pareto_layers(scores({{1, 2}, {2, 1}, {2, 2}, {3, 3}, {1, 1}}));
  std::size_t total = 0;
  for (const auto& l : layers) total += l.members.size();
  CHECK(total == 5);
  CHECK(layers.front().members == std::vector<std::size_t>{4});
}

TEST_CASE("hypervolume of a union") {
  auto one = scores({{1, 1}});
  CHECK(hv_union_2d(pareto_front(one), one, {2, 2}) == doctest::Approx(1.0));
  auto two = scores({{1, 2}, {2, 1}});
  CHECK(std::abs(hv_union_2d(pareto_front(two), two, {3, 3}) - 3.0) < 1e-12);
  auto at_r = scores({{3, 3}, {1, 2}});
  CHECK(hv_contribution(0, at_r, {3, 3}) == 0.0);
}

TEST_CASE("hypervolume sweep against grid and Monte-Carlo areas") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<ExploreExploitScore> s;
    std::vector<oracle::Pt> pts;
    for (int i = 0; i < 8; ++i) {
      s.push_back({u(g), u(g)});
      pts.push_back({s.back().mu, s.back().sigma});
    }
    const ReferencePoint2D r{1.2, 1.1};
    const double sweep = hv_union_2d(pareto_front(s), s, r);
    CHECK(std::abs(sweep - oracle::grid_union_area(pts, {r.r_mu, r.r_sigma})) < 1e-12);
    CHECK(std::abs(sweep - oracle::mc_union_area(pts, {r.r_mu, r.r_sigma}, {0, 0}, 200000, rep)) < 2e-2);
  }
}

TEST_CASE("hypervolume contribution") {
  auto dominated = scores({{1, 1}, {2, 2}});
  CHECK(hv_contribution(1, dominated, {3, 3}) == 0.0);
  auto one = scores({{1, 1}});
  CHECK(hv_contribution(0, one, {2, 2}) == doctest::Approx(1.0));
  auto two = scores({{1, 2}, {2, 1}});
  CHECK(std::abs(hv_contribution(0, two, {3, 3}) - 1.0) < 1e-12);

  // Against full recomputation without the point.
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ExploreExploitScore> s;
  for (int i = 0; i < 12; ++i) s.push_back({u(g), u(g)});
  const ReferencePoint2D r = default_reference(s);
  const ParetoFront2D front = pareto_front(s);
  const double full = hv_union_2d(front, s, r);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<oracle::Pt> rest;
    for (auto j : front.members)
      if (j != i) rest.push_back({s[j].mu, s[j].sigma});
    const double expected = full - oracle::grid_union_area(rest, {r.r_mu, r.r_sigma});
    CHECK(std::abs(hv_contribution(i, s, r) - expected) < 1e-12);
  }
}

TEST_CASE("chee before and after evaluation") {
  auto s = scores({{1, 2}, {2, 1}});
  const auto v = chee(0, s, 1.5, {3, 3});
  CHECK(std::abs(v.pre_value - 1.0) < 1e-12);
  // Observed 1.5 replaces mu: (1.5,2) vs (2,1) -> 0.5 * 1
  CHECK(std::abs(v.post_value - 0.5) < 1e-12);
  CHECK(chee(0, s, 5.0, {3, 3}).post_value == 0.0);
  auto dominated = scores({{1, 1}, {2, 2}});
  CHECK(chee(1, dominated, 2.0, {3, 3}).pre_value == 0.0);
}

TEST_CASE("des") {
  const Matrix x = random_matrix(30, 3, 1);
  const double h = des(x).value;
  Matrix shifted = x;
  shifted.rowwise() += Eigen::RowVectorXd::Constant(3, 17.5);
  CHECK(std::abs(des(shifted).value - h) < 1e-9);

  Matrix cluster = Matrix::Constant(50, 2, 0.5) + 0.01 * (random_matrix(50, 2, 2).array() - 0.5).matrix();
  CHECK(des(cluster).value < des(random_matrix(50, 2, 3)).value);

  std::mt19937_64 g(2024);
  std::normal_distribution<double> n01;
  Matrix normal(2000, 1);
  for (Eigen::Index i = 0; i < 2000; ++i) normal(i, 0) = n01(g);
  CHECK(std::abs(des(normal).value - oracle::gaussian_entropy_1d()) < 0.1);
  CHECK(std::abs(des(normal, {true}).value - oracle::gaussian_entropy_1d()) < 0.1);

  CHECK_THROWS_AS(des(Matrix::Zero(1, 2)), Error);
  CHECK(des(Matrix::Zero(3, 2)).degenerate);
}

TEST_CASE("dis") {
  CHECK(dis(rows({{0.3, 0.2}})).det == doctest::Approx(1.0));
  CHECK(dis(rows({{0.3, 0.2}, {0.3, 0.2}})).det <= 1e-9);
  for (unsigned seed = 0; seed < 6; ++seed) {
    const Matrix b = random_matrix(3 + seed % 3, 2, seed);
    const auto r = dis(b);
    const double ref = oracle::leibniz_det(oracle::rbf(b, r.bandwidth, 1e-10));
    CHECK(std::abs(r.det - ref) <= 1e-9 * std::abs(ref));
  }
  const Matrix b = random_matrix(4, 2, 9);
  CHECK(dis(b, 0.5).bandwidth == 0.5);
}

TEST_CASE("abd") {
  CHECK(abd(rows({{0, 0}}), rows({{0, 0}, {1, 1}})) == 0.0);
  CHECK(std::abs(abd(rows({{1, 0}, {0, 2}}), rows({{0, 0}})) - 1.5) < 1e-12);
  const Matrix batch = random_matrix(5, 3, 4), data = random_matrix(7, 3, 5);
  CHECK(std::abs(abd(3.0 * batch, 3.0 * data) - 3.0 * abd(batch, data)) < 1e-12);
}

TEST_CASE("hve") {
  CHECK(hve(scores({{3, 3}}), {3, 3}) == 0.0);
  CHECK(std::abs(hve(scores({{1, 1}, {2, 2}}), {3, 3}) - 5.0) < 1e-12);
  CHECK(hve(scores({{1, 1}, {2, 2}, {0.5, 0.5}}), {3, 3}) > 5.0);
  CHECK_THROWS_AS(hve(scores({{4, 1}}), {3, 3}), Error);
}

TEST_CASE("default reference point") {
  // Flat scores use the unit range floor: 5 + 0.1 * 1.
  const auto flat = default_reference(scores({{5, 5}, {5, 5}}));
  CHECK(std::abs(flat.r_mu - 5.1) < 1e-12);
  CHECK(std::abs(flat.r_sigma - 5.1) < 1e-12);
  const auto r = default_reference(scores({{0, 0}, {10, 2}}));
  CHECK(std::abs(r.r_mu - 11.0) < 1e-12);
  CHECK(std::abs(r.r_sigma - 2.2) < 1e-12);
  auto s = scores({{0.1, -3}, {4, 2}, {-1, 0.5}});
  const auto rr = default_reference(s);
  for (const auto& p : s) CHECK((p.mu < rr.r_mu && p.sigma < rr.r_sigma));
}
