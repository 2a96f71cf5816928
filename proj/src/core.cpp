#include "iemso/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace iemso {

namespace {

std::string dimension_message(const std::string& what, std::size_t expected, std::size_t actual) {
  std::ostringstream os;
  os << what << ": expected dimension " << expected << ", got " << actual;
  return os.str();
}

}  // namespace

DimensionError::DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
    : Error(dimension_message(what, expected, actual)), expected_(expected), actual_(actual) {}

Bounds::Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw DimensionError("bounds upper", static_cast<std::size_t>(lower_.size()),
                         static_cast<std::size_t>(upper_.size()));
  }
  if (lower_.size() == 0) throw Error("bounds must have at least one dimension");
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j])) {
      std::ostringstream os;
      os << "bounds: dimension " << j + 1 << " requires lower < upper, got [" << lower_[j] << ", "
         << upper_[j] << "]";
      throw Error(os.str());
    }
  }
}

Bounds Bounds::uniform(std::size_t dim, double lower, double upper) {
  return Bounds(Vector::Constant(static_cast<Eigen::Index>(dim), lower),
                Vector::Constant(static_cast<Eigen::Index>(dim), upper));
}

EvaluatedSet::EvaluatedSet(Matrix points, Vector values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.rows() != values_.size()) {
    throw DimensionError("evaluated set values", static_cast<std::size_t>(points_.rows()),
                         static_cast<std::size_t>(values_.size()));
  }
}

void EvaluatedSet::append(const Matrix& points, const Vector& values) {
  if (points.rows() != values.size()) {
    throw DimensionError("appended values", static_cast<std::size_t>(points.rows()),
                         static_cast<std::size_t>(values.size()));
  }
  if (empty() && points_.cols() == 0) {
    points_ = points;
    values_ = values;
    return;
  }
  require_dim(points, dim(), "appended points");
  points_ = stack_rows(points_, points);
  Vector joined(values_.size() + values.size());
  joined << values_, values;
  values_ = std::move(joined);
}

void require_dim(const Matrix& points, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(points.cols()) != expected) {
    throw DimensionError(what, expected, static_cast<std::size_t>(points.cols()));
  }
}

bool validate_in_bounds(const Matrix& points, const Bounds& bounds) {
  require_dim(points, bounds.dim(), "points");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double v = points(i, j);
      if (!(v >= bounds.lower()[j] && v <= bounds.upper()[j])) return false;
    }
  }
  return true;
}

Matrix pairwise_distance(const Matrix& a, const Matrix& b) {
  require_dim(b, static_cast<std::size_t>(a.cols()), "pairwise_distance");
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = (a.row(i) - b.row(j)).norm();
    }
  }
  return out;
}

Vector min_distance(const Matrix& queries, const Matrix& reference) {
  require_dim(reference, static_cast<std::size_t>(queries.cols()), "min_distance");
  if (reference.rows() == 0) throw Error("min_distance: empty reference set");
  Vector out(queries.rows());
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < reference.rows(); ++j) {
      best = std::min(best, (queries.row(i) - reference.row(j)).squaredNorm());
    }
    out[i] = std::sqrt(best);
  }
  return out;
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  if (top.rows() == 0) return bottom;
  if (bottom.rows() == 0) return top;
  require_dim(bottom, static_cast<std::size_t>(top.cols()), "stack_rows");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Matrix take_rows(const Matrix& points, const std::vector<std::size_t>& indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), points.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= static_cast<std::size_t>(points.rows())) throw Error("take_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

}  // namespace iemso
