#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iemso/core.hpp"

namespace iemso {

// ---------------------------------------------------------------------------
// Gaussian process
// ---------------------------------------------------------------------------

/// Optional overrides for the heuristic hyperparameters.
struct GpConfig {
  std::optional<double> length_scale;     ///< in bounds-standardized units
  std::optional<double> signal_variance;  ///< s^2
  bool center_targets = true;             ///< subtract mean(y) before the zero-mean fit
};

/// Zero-mean GP regressor with a squared-exponential kernel. Inputs are
/// rescaled to the unit box of the attached bounds before the kernel is applied.
class GpModel {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(train_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(train_.rows()); }
  double length_scale() const { return length_scale_; }
  double signal_variance() const { return signal_variance_; }
  double jitter() const { return jitter_; }
  double mean_offset() const { return offset_; }
  const Bounds& bounds() const { return bounds_; }

  Vector predict_mean(const Matrix& points) const;
  /// Posterior standard deviation (raw exploration score).
  Vector predict_std(const Matrix& points) const;
  /// Mean and standard deviation in one pass.
  void predict(const Matrix& points, Vector& mean, Vector& stddev) const;

  /// Same hyperparameters, conditioned on a different data set.
  GpModel refit(const EvaluatedSet& data) const;

 private:
  friend GpModel fit_gp(const EvaluatedSet&, const Bounds&, const GpConfig&);

  GpModel(Bounds bounds) : bounds_(std::move(bounds)) {}
  Matrix standardize(const Matrix& points) const;
  Matrix cross_kernel(const Matrix& standardized) const;
  void condition(const EvaluatedSet& data);

  Bounds bounds_;
  double length_scale_ = 1.0;
  double signal_variance_ = 1.0;
  double jitter_ = 0.0;
  double offset_ = 0.0;
  bool center_ = true;
  Matrix train_;  // standardized inputs
  Eigen::LLT<Matrix> factor_;
  Vector alpha_;
};

/// Fits the GP. Duplicate rows are merged with averaged targets first.
/// Length scale: median pairwise distance of bounds-standardized inputs.
/// Signal variance: sample variance of y, floored at 1e-12.
GpModel fit_gp(const EvaluatedSet& data, const Bounds& bounds, const GpConfig& config = {});

/// Bounds spanning the data's per-coordinate range (unit width where flat).
Bounds bounds_from_data(const Matrix& points);

/// Merges identical rows, averaging their targets. First-occurrence order.
EvaluatedSet merge_duplicates(const EvaluatedSet& data);

std::vector<ExploreExploitScore> gp_predict(const GpModel& model, const Matrix& points);

// ---------------------------------------------------------------------------
// Regression tree
// ---------------------------------------------------------------------------

enum class Comparison { less_equal, greater };

struct SplitRule {
  std::size_t feature = 0;  // 0-based
  Comparison comparison = Comparison::less_equal;
  double threshold = 0.0;

  bool holds(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct LeafStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
};

/// A leaf region: conjunction of rules from the root plus training statistics.
struct Partition {
  std::vector<SplitRule> rules;
  LeafStats stats;

  bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// `x3 <= 0.4125 AND x7 > -1.2000`; `ALL` for the root-only tree.
  std::string rule_string() const;
};

struct TreeParams {
  std::size_t max_depth = 4;
  std::size_t min_leaf = 5;
};

class TreeModel {
 public:
  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t leaf_id = 0;  // position in extract_partitions() order
    LeafStats stats;
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t dim() const { return dim_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Vector predict(const Matrix& points) const;
  /// Index into extract_partitions() order of the leaf containing `x`.
  std::size_t leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

 private:
  friend TreeModel fit_tree(const EvaluatedSet&, const TreeParams&);
  friend std::vector<Partition> extract_partitions(const TreeModel&);

  std::vector<Node> nodes_;  // nodes_[0] is the root
  std::size_t dim_ = 0;
};

/// Greedy CART with variance-reduction splits at midpoints between
/// consecutive distinct feature values. Ties: lowest feature, then lowest threshold.
TreeModel fit_tree(const EvaluatedSet& data, const TreeParams& params = {});

/// One partition per leaf, in depth-first (left before right) order.
std::vector<Partition> extract_partitions(const TreeModel& model);

// ---------------------------------------------------------------------------
// Model-agnostic exploration
// ---------------------------------------------------------------------------

/// Minimum Euclidean distance from each query to the evaluated points.
Vector distance_exploration(const Matrix& evaluated_points, const Matrix& queries);

}  // namespace iemso
