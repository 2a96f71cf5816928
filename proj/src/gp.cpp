#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "iemso/surrogate.hpp"

namespace iemso {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kInitialJitter = 1e-8;
constexpr double kMaxJitter = 1e-2;

struct RowLess {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const { return a < b; }
};

double median(std::vector<double> values) {
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

EvaluatedSet merge_duplicates(const EvaluatedSet& data) {
  std::map<std::vector<double>, std::size_t, RowLess> seen;
  std::vector<std::size_t> first_row;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.points().row(static_cast<Eigen::Index>(i));
    std::vector<double> key(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) key[static_cast<std::size_t>(j)] = row[j];
    auto [it, inserted] = seen.emplace(std::move(key), first_row.size());
    if (inserted) {
      first_row.push_back(i);
      sums.push_back(0.0);
      counts.push_back(0);
    }
    sums[it->second] += data.values()[static_cast<Eigen::Index>(i)];
    counts[it->second] += 1;
  }
  if (first_row.size() == data.size()) return data;
  Matrix points = take_rows(data.points(), first_row);
  Vector values(static_cast<Eigen::Index>(first_row.size()));
  for (std::size_t u = 0; u < first_row.size(); ++u) {
    values[static_cast<Eigen::Index>(u)] = sums[u] / static_cast<double>(counts[u]);
  }
  return EvaluatedSet(std::move(points), std::move(values));
}

Bounds bounds_from_data(const Matrix& points) {
  if (points.rows() == 0) throw Error("bounds_from_data: empty point set");
  Vector lo = points.colwise().minCoeff().transpose();
  Vector hi = points.colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(hi[j] > lo[j])) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }
  return Bounds(lo, hi);
}

Matrix GpModel::standardize(const Matrix& points) const {
  require_dim(points, bounds_.dim(), "gp input");
  const Eigen::RowVectorXd lo = bounds_.lower().transpose();
  const Eigen::RowVectorXd inv_width = bounds_.width().cwiseInverse().transpose();
  return (points.rowwise() - lo).array().rowwise() * inv_width.array();
}

Matrix GpModel::cross_kernel(const Matrix& standardized) const {
  // ||a - b||^2 = |a|^2 + |b|^2 - 2 a.b
  const Vector qn = standardized.rowwise().squaredNorm();
  const Vector tn = train_.rowwise().squaredNorm();
  Matrix sq = -2.0 * standardized * train_.transpose();
  sq.colwise() += qn;
  sq.rowwise() += tn.transpose();
  const double scale = -0.5 / (length_scale_ * length_scale_);
  return signal_variance_ * (sq.cwiseMax(0.0) * scale).array().exp().matrix();
}

void GpModel::condition(const EvaluatedSet& raw) {
  const EvaluatedSet data = merge_duplicates(raw);
  train_ = standardize(data.points());
  const auto n = train_.rows();

  Matrix k(n, n);
  const double scale = -0.5 / (length_scale_ * length_scale_);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = signal_variance_;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = signal_variance_ * std::exp((train_.row(i) - train_.row(j)).squaredNorm() * scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  for (double rel = kInitialJitter; rel <= kMaxJitter * (1.0 + 1e-9); rel *= 10.0) {
    jitter_ = rel * signal_variance_;
    Matrix kj = k;
    kj.diagonal().array() += jitter_;
    factor_.compute(kj);
    if (factor_.info() == Eigen::Success) {
      const Vector centered = data.values().array() - offset_;
      alpha_ = factor_.solve(centered);
      if (alpha_.allFinite()) return;
    }
  }
  std::ostringstream os;
  os << "fit_gp: kernel factorization failed with jitter up to " << kMaxJitter << " * s^2 (n = " << n << ")";
  throw Error(os.str());
}

GpModel fit_gp(const EvaluatedSet& raw, const Bounds& bounds, const GpConfig& config) {
  if (raw.size() < 2) throw Error("fit_gp: at least 2 evaluated points are required");
  require_dim(raw.points(), bounds.dim(), "fit_gp");
  const EvaluatedSet data = merge_duplicates(raw);

  GpModel model(bounds);
  model.center_ = config.center_targets;
  model.offset_ = config.center_targets ? data.values().mean() : 0.0;

  if (config.signal_variance) {
    if (!(*config.signal_variance > 0.0)) throw Error("fit_gp: signal variance must be positive");
    model.signal_variance_ = *config.signal_variance;
  } else if (data.size() >= 2) {
    const Vector c = data.values().array() - data.values().mean();
    model.signal_variance_ = std::max(c.squaredNorm() / static_cast<double>(data.size() - 1), kVarianceFloor);
  } else {
    model.signal_variance_ = kVarianceFloor;
  }

  if (config.length_scale) {
    if (!(*config.length_scale > 0.0)) throw Error("fit_gp: length scale must be positive");
    model.length_scale_ = *config.length_scale;
  } else {
    const Matrix z = model.standardize(data.points());
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(z.rows() * (z.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) dists.push_back((z.row(i) - z.row(j)).norm());
    }
    const double med = dists.empty() ? 1.0 : median(std::move(dists));
    model.length_scale_ = med > 1e-9 ? med : 1.0;
  }

  model.condition(data);
  return model;
}

GpModel GpModel::refit(const EvaluatedSet& data) const {
  if (data.size() < 1) throw Error("refit: empty data");
  GpModel model(bounds_);
  model.center_ = center_;
  model.offset_ = offset_;
  model.signal_variance_ = signal_variance_;
  model.length_scale_ = length_scale_;
  model.condition(data);
  return model;
}

void GpModel::predict(const Matrix& points, Vector& mean, Vector& stddev) const {
  const Matrix kx = cross_kernel(standardize(points));
  mean = (kx * alpha_).array() + offset_;
  const Matrix v = factor_.matrixL().solve(kx.transpose());
  const Vector var = (signal_variance_ - v.colwise().squaredNorm().transpose().array()).matrix();
  stddev = var.cwiseMax(0.0).cwiseSqrt();
}

Vector GpModel::predict_mean(const Matrix& points) const {
  const Matrix kx = cross_kernel(standardize(points));
  return (kx * alpha_).array() + offset_;
}

Vector GpModel::predict_std(const Matrix& points) const {
  Vector mean, stddev;
  predict(points, mean, stddev);
  return stddev;
}

std::vector<ExploreExploitScore> gp_predict(const GpModel& model, const Matrix& points) {
  Vector mean, stddev;
  model.predict(points, mean, stddev);
  std::vector<ExploreExploitScore> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = ExploreExploitScore::from_raw(mean[i], stddev[i]);
  }
  return out;
}

Vector distance_exploration(const Matrix& evaluated_points, const Matrix& queries) {
  if (evaluated_points.rows() == 0) throw Error("distance_exploration: empty evaluated set");
  return min_distance(queries, evaluated_points);
}

}  // namespace iemso
