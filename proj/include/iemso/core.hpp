#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iemso {

/// Row-per-point matrix (n x d).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual);

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Axis-aligned box [lower, upper] with lower[j] < upper[j] for every j.
class Bounds {
 public:
  Bounds(Vector lower, Vector upper);

  /// Same interval on every one of `dim` coordinates.
  static Bounds uniform(std::size_t dim, double lower, double upper);

  std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }
  Vector midpoint() const { return 0.5 * (lower_ + upper_); }

 private:
  Vector lower_;
  Vector upper_;
};

/// Evaluated points and their objective values.
class EvaluatedSet {
 public:
  EvaluatedSet() = default;
  EvaluatedSet(Matrix points, Vector values);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  bool empty() const { return points_.rows() == 0; }
  const Matrix& points() const { return points_; }
  const Vector& values() const { return values_; }

  /// Appends rows; dimension must match unless the set is empty.
  void append(const Matrix& points, const Vector& values);

 private:
  Matrix points_;
  Vector values_;
};

/// Per-point (exploitation, exploration) pair, both minimize-is-better.
/// `sigma` holds the negated raw exploration score.
struct ExploreExploitScore {
  double mu = 0.0;
  double sigma = 0.0;

  static ExploreExploitScore from_raw(double mu, double sigma_raw) { return {mu, -sigma_raw}; }
  double sigma_raw() const { return -sigma; }

  friend bool operator==(const ExploreExploitScore&, const ExploreExploitScore&) = default;
};

struct RngSeed {
  std::uint64_t value = 0;
};

/// Throws DimensionError when `points` does not have `expected` columns.
void require_dim(const Matrix& points, std::size_t expected, const char* what);

bool validate_in_bounds(const Matrix& points, const Bounds& bounds);

/// Euclidean distance between every row of `a` and every row of `b` (p x q).
Matrix pairwise_distance(const Matrix& a, const Matrix& b);

/// Minimum distance from each row of `queries` to any row of `reference`.
Vector min_distance(const Matrix& queries, const Matrix& reference);

/// Vertical stack of two point matrices with equal column count.
Matrix stack_rows(const Matrix& top, const Matrix& bottom);

/// Rows of `points` selected by `indices`, in the order given.
Matrix take_rows(const Matrix& points, const std::vector<std::size_t>& indices);

}  // namespace iemso
