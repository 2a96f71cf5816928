#pragma once

#include <span>
#include <vector>

#include "iemso/core.hpp"
#include "iemso/surrogate.hpp"

namespace iemso {

/// Best-known objective value after each iteration (running minimum).
class BestValueSequence {
 public:
  BestValueSequence() = default;
  /// Applies a running minimum to `observed`.
  explicit BestValueSequence(std::span<const double> observed);

  void push(double observed);
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// Mean relative decrease of the best value per iteration. Throws when a
/// denominator is within 1e-12 of zero or the sequence changes sign.
double cr(const BestValueSequence& sequence);

/// cr applied to values - min + shift (shift > 0).
double cr_shifted(const BestValueSequence& sequence, double shift);

/// Population standard deviation of final values across runs (m >= 2).
double os(std::span<const double> final_values);

struct PssaResult {
  std::vector<Partition> partitions;
  std::vector<std::size_t> batch_assignment;  ///< partition index per batch row
  std::vector<std::size_t> batch_counts;      ///< batch rows per partition
};

/// Fits a regression tree on the evaluated set and locates the batch in its leaves.
PssaResult pssa(const EvaluatedSet& data, const Matrix& batch, const TreeParams& params = {});

}  // namespace iemso
