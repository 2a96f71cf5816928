#include "iemso/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace iemso {

namespace {

constexpr double kBandwidthFloor = 1e-9;
constexpr double kDisJitter = 1e-10;

void require_nonempty(const Matrix& points, const char* what) {
  if (points.rows() == 0) throw Error(std::string(what) + ": empty point set");
}

void check_reference(const ExploreExploitScore& s, const ReferencePoint2D& r, std::size_t index) {
  if (s.mu > r.r_mu || s.sigma > r.r_sigma) {
    std::ostringstream os;
    os << "reference point (" << r.r_mu << ", " << r.r_sigma << ") is not weakly worse than score " << index << " ("
       << s.mu << ", " << s.sigma << ")";
    throw Error(os.str());
  }
}

bool score_less(const ExploreExploitScore& a, const ExploreExploitScore& b) {
  return a.mu < b.mu || (a.mu == b.mu && a.sigma < b.sigma);
}

// Front over the subset `candidates` of indices.
ParetoFront2D front_of(std::span<const ExploreExploitScore> scores, std::vector<std::size_t> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return score_less(scores[a], scores[b]); });
  ParetoFront2D front;
  double best_sigma = std::numeric_limits<double>::infinity();
  for (auto i : candidates) {
    if (scores[i].sigma < best_sigma) {
      front.members.push_back(i);
      best_sigma = scores[i].sigma;
    }
  }
  return front;
}

double median_of(std::vector<double> values) {
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

PceResult pce(const Matrix& points, const Bounds& bounds) {
  require_nonempty(points, "pce");
  require_dim(points, bounds.dim(), "pce");
  PceResult out;
  out.per_dim = ((points.colwise().maxCoeff() - points.colwise().minCoeff()).transpose().array() /
                 bounds.width().array())
                    .matrix();
  out.average = out.per_dim.mean();
  return out;
}

double mdpe_point(const Eigen::Ref<const Eigen::RowVectorXd>& point, const Matrix& evaluated) {
  require_nonempty(evaluated, "mdpe");
  if (point.size() != evaluated.cols()) {
    throw DimensionError("mdpe point", static_cast<std::size_t>(evaluated.cols()), static_cast<std::size_t>(point.size()));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < evaluated.rows(); ++i) sum += (evaluated.row(i) - point).norm();
  return sum / static_cast<double>(evaluated.rows());
}

Vector mdpe(const Matrix& batch, const Matrix& evaluated) {
  Vector out(batch.rows());
  for (Eigen::Index i = 0; i < batch.rows(); ++i) out[i] = mdpe_point(batch.row(i), evaluated);
  return out;
}

bool ParetoFront2D::contains(std::size_t index) const {
  return std::find(members.begin(), members.end(), index) != members.end();
}

ParetoFront2D pareto_front(std::span<const ExploreExploitScore> scores) {
  if (scores.empty()) throw Error("pareto_front: empty score list");
  std::vector<std::size_t> all(scores.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return front_of(scores, std::move(all));
}

std::vector<ParetoFront2D> pareto_layers(std::span<const ExploreExploitScore> scores) {
  std::vector<ParetoFront2D> layers;
  std::vector<std::size_t> remaining(scores.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  while (!remaining.empty()) {
    ParetoFront2D layer = front_of(scores, remaining);
    std::vector<char> taken(scores.size(), 0);
    for (auto i : layer.members) taken[i] = 1;
    std::erase_if(remaining, [&](std::size_t i) { return taken[i] != 0; });
    layers.push_back(std::move(layer));
  }
  return layers;
}

double hv_union_2d(const ParetoFront2D& front, std::span<const ExploreExploitScore> scores,
                   const ReferencePoint2D& r) {
  double area = 0.0;
  for (std::size_t p = 0; p < front.members.size(); ++p) {
    const auto& s = scores[front.members[p]];
    check_reference(s, r, front.members[p]);
    const double next_mu = p + 1 < front.members.size() ? scores[front.members[p + 1]].mu : r.r_mu;
    area += (next_mu - s.mu) * (r.r_sigma - s.sigma);
  }
  return area;
}

double hv_contribution(std::size_t index, std::span<const ExploreExploitScore> scores, const ReferencePoint2D& r) {
  if (index >= scores.size()) throw Error("hv_contribution: index out of range");
  const ParetoFront2D front = pareto_front(scores);
  for (std::size_t p = 0; p < front.members.size(); ++p) check_reference(scores[front.members[p]], r, front.members[p]);
  const auto it = std::find(front.members.begin(), front.members.end(), index);
  if (it == front.members.end()) return 0.0;
  const auto p = static_cast<std::size_t>(it - front.members.begin());
  // Only the rectangle between the neighbouring members is exclusive to `index`.
  const double next_mu = p + 1 < front.members.size() ? scores[front.members[p + 1]].mu : r.r_mu;
  const double prev_sigma = p > 0 ? scores[front.members[p - 1]].sigma : r.r_sigma;
  return (next_mu - scores[index].mu) * (prev_sigma - scores[index].sigma);
}

CheeValue chee(std::size_t index, std::span<const ExploreExploitScore> scores, double observed,
               const ReferencePoint2D& r) {
  if (index >= scores.size()) throw Error("chee: index out of range");
  CheeValue out;
  out.pre_value = hv_contribution(index, scores, r);
  if (!(observed <= r.r_mu)) return out;
  std::vector<ExploreExploitScore> post(scores.begin(), scores.end());
  post[index].mu = observed;
  out.post_value = hv_contribution(index, post, r);
  return out;
}

DesResult des(const Matrix& batch, const DesOptions& options) {
  const auto k = batch.rows();
  const auto d = batch.cols();
  if (k < 2) throw Error("des: at least 2 batch points are required");
  if (options.leave_one_out && k < 2) throw Error("des: leave-one-out requires at least 2 points");

  DesResult out;
  const Eigen::RowVectorXd mean = batch.colwise().mean();
  Vector h(d);
  const double factor = std::pow(static_cast<double>(k), -1.0 / (static_cast<double>(d) + 4.0));
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (batch.col(j).array() - mean[j]).square().sum() / static_cast<double>(k - 1);
    double sd = std::sqrt(var);
    if (!(sd >= kBandwidthFloor)) {
      sd = kBandwidthFloor;
      out.degenerate = true;
    }
    h[j] = sd * factor;
  }
  const double log_norm = h.array().log().sum() + 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  const Eigen::RowVectorXd inv_h = h.cwiseInverse().transpose();

  const Eigen::Index others = options.leave_one_out ? k - 1 : k;
  std::vector<double> exps(static_cast<std::size_t>(k));
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    std::size_t m = 0;
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < k; ++l) {
      if (options.leave_one_out && l == i) continue;
      const double e = -0.5 * ((batch.row(i) - batch.row(l)).array() * inv_h.array()).square().sum();
      exps[m++] = e;
      peak = std::max(peak, e);
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < m; ++q) acc += std::exp(exps[q] - peak);
    const double log_p = peak + std::log(acc) - std::log(static_cast<double>(others)) - log_norm;
    total += log_p;
  }
  out.value = -total / static_cast<double>(k);
  return out;
}

double median_bandwidth(const Matrix& batch) {
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) dists.push_back((batch.row(i) - batch.row(j)).norm());
  }
  if (dists.empty()) return 1.0;
  const double med = median_of(std::move(dists));
  return med > 0.0 ? med : 1.0;
}

Matrix rbf_kernel_matrix(const Matrix& batch, double bandwidth) {
  const auto k = batch.rows();
  Matrix l(k, k);
  const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
  for (Eigen::Index i = 0; i < k; ++i) {
    l(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::exp((batch.row(i) - batch.row(j)).squaredNorm() * scale);
      l(i, j) = v;
      l(j, i) = v;
    }
  }
  return l;
}

DisResult dis(const Matrix& batch, std::optional<double> bandwidth) {
  require_nonempty(batch, "dis");
  if (!batch.allFinite()) throw Error("dis: batch contains non-finite coordinates");
  DisResult out;
  out.bandwidth = bandwidth ? *bandwidth : median_bandwidth(batch);
  if (!(out.bandwidth > 0.0) || !std::isfinite(out.bandwidth)) throw Error("dis: bandwidth must be positive");
  Matrix l = rbf_kernel_matrix(batch, out.bandwidth);
  l.diagonal().array() += kDisJitter;
  if (!l.allFinite()) throw Error("dis: kernel matrix has non-finite entries");

  const Eigen::PartialPivLU<Matrix> lu(l);
  const Matrix& packed = lu.matrixLU();
  double log_abs = 0.0;
  double sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double u = packed(i, i);
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  out.log_det = log_abs;
  out.det = sign * std::exp(log_abs);
  return out;
}

double abd(const Matrix& batch, const Matrix& evaluated) {
  require_nonempty(batch, "abd batch");
  require_nonempty(evaluated, "abd evaluated set");
  return min_distance(batch, evaluated).mean();
}

double hve(std::span<const ExploreExploitScore> batch_scores, const ReferencePoint2D& r) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch_scores.size(); ++i) {
    check_reference(batch_scores[i], r, i);
    total += (r.r_mu - batch_scores[i].mu) * (r.r_sigma - batch_scores[i].sigma);
  }
  return total;
}

ReferencePoint2D default_reference(std::span<const ExploreExploitScore> scores) {
  if (scores.empty()) throw Error("default_reference: empty score list");
  double mu_lo = scores[0].mu, mu_hi = scores[0].mu;
  double sg_lo = scores[0].sigma, sg_hi = scores[0].sigma;
  for (const auto& s : scores) {
    mu_lo = std::min(mu_lo, s.mu);
    mu_hi = std::max(mu_hi, s.mu);
    sg_lo = std::min(sg_lo, s.sigma);
    sg_hi = std::max(sg_hi, s.sigma);
  }
  return {mu_hi + 0.1 * std::max(mu_hi - mu_lo, 1.0), sg_hi + 0.1 * std::max(sg_hi - sg_lo, 1.0)};
}

}  // namespace iemso
