#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "iemso/core.hpp"

namespace iemso {

enum class Family { branin, rosenbrock, rastrigin, levy };

/// Synthetic black-box objective (minimization) with an evaluation counter.
class Problem {
 public:
  Problem(Family family, std::size_t dim);
  Problem(const Problem& other);
  Problem& operator=(const Problem&) = delete;

  const std::string& name() const { return name_; }
  Family family() const { return family_; }
  std::size_t dim() const { return bounds_.dim(); }
  const Bounds& bounds() const { return bounds_; }
  std::uint64_t evaluations_used() const { return evaluations_.load(); }

  /// Evaluates every row. Throws on any out-of-bounds row; the counter is
  /// only incremented when the whole call succeeds.
  Vector evaluate(const Matrix& points);

  /// Objective value without touching the counter or checking bounds.
  double value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  /// Known global minimizer and minimum value.
  Vector minimizer() const;
  double minimum() const;

 private:
  Family family_;
  std::string name_;
  Bounds bounds_;
  std::atomic<std::uint64_t> evaluations_{0};
};

/// Supported names: branin (d = 2), rosenbrock (d >= 2), rastrigin, levy (d >= 1).
Problem make_problem(const std::string& name, std::size_t dim);

std::vector<std::string> problem_names();

/// `m` i.i.d. uniform points inside `bounds`; with `latin_hypercube` each
/// coordinate is stratified into `m` equal bins instead.
Matrix sample_candidates(const Bounds& bounds, std::size_t m, RngSeed seed, bool latin_hypercube = false);

}  // namespace iemso
