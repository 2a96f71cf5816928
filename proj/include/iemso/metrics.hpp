#pragma once

#include <optional>
#include <span>
#include <vector>

#include "iemso/core.hpp"

namespace iemso {

// Sampling core and batch property metrics. Every exploration coordinate
// consumed here is in canonical (negated, minimize-is-better) orientation.

struct PceResult {
  Vector per_dim;
  double average = 0.0;
};

/// Normalized per-coordinate range covered by `points`.
PceResult pce(const Matrix& points, const Bounds& bounds);

/// Mean Euclidean distance from `point` to every evaluated point.
double mdpe_point(const Eigen::Ref<const Eigen::RowVectorXd>& point, const Matrix& evaluated);
/// mdpe for every row of `batch`.
Vector mdpe(const Matrix& batch, const Matrix& evaluated);

/// Non-dominated members sorted by ascending mu (strictly decreasing sigma).
struct ParetoFront2D {
  std::vector<std::size_t> members;

  bool contains(std::size_t index) const;
};

struct ReferencePoint2D {
  double r_mu = 0.0;
  double r_sigma = 0.0;
};

/// Exact duplicates keep only their lowest index.
ParetoFront2D pareto_front(std::span<const ExploreExploitScore> scores);

/// Successive non-dominated layers; every index appears in exactly one layer.
std::vector<ParetoFront2D> pareto_layers(std::span<const ExploreExploitScore> scores);

/// Area of the union of rectangles [point, r] over the front (exact sweep).
double hv_union_2d(const ParetoFront2D& front, std::span<const ExploreExploitScore> scores, const ReferencePoint2D& r);

/// HV(front) - HV(front without `index`); 0 when `index` is not on the front.
double hv_contribution(std::size_t index, std::span<const ExploreExploitScore> scores, const ReferencePoint2D& r);

struct CheeValue {
  double pre_value = 0.0;
  double post_value = 0.0;
};

/// Contribution before evaluation (surrogate scores) and after (mu replaced
/// by the observed objective, exploration coordinate unchanged). The post
/// value is 0 when the observed value lies beyond r_mu.
CheeValue chee(std::size_t index, std::span<const ExploreExploitScore> scores, double observed,
               const ReferencePoint2D& r);

struct DesOptions {
  bool leave_one_out = false;
};

struct DesResult {
  double value = 0.0;
  bool degenerate = false;  ///< some coordinate had zero spread and hit the bandwidth floor
};

/// Differential-entropy estimate -(1/k) sum log p(x_i) under a Gaussian
/// product KDE with per-dimension Scott bandwidths.
DesResult des(const Matrix& batch, const DesOptions& options = {});

struct DisResult {
  double det = 0.0;
  double log_det = 0.0;
  double bandwidth = 0.0;
};

/// RBF-kernel matrix of the batch.
Matrix rbf_kernel_matrix(const Matrix& batch, double bandwidth);

/// Median pairwise distance of the batch rows; 1 when undefined or zero.
double median_bandwidth(const Matrix& batch);

/// Determinant of the RBF kernel matrix (plus 1e-10 diagonal jitter).
/// Without `bandwidth` the median heuristic is used.
DisResult dis(const Matrix& batch, std::optional<double> bandwidth = std::nullopt);

/// Mean over batch rows of the minimum distance to the evaluated set.
double abd(const Matrix& batch, const Matrix& evaluated);

/// Sum over batch scores of the rectangle area to r (not a union).
double hve(std::span<const ExploreExploitScore> batch_scores, const ReferencePoint2D& r);

/// r = max + 0.1 * max(range, 1) on each coordinate.
ReferencePoint2D default_reference(std::span<const ExploreExploitScore> scores);

}  // namespace iemso
