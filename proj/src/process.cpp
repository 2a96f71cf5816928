#include "iemso/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace iemso {

namespace {

constexpr double kDenominatorFloor = 1e-12;

}  // namespace

BestValueSequence::BestValueSequence(std::span<const double> observed) {
  for (double v : observed) push(v);
}

void BestValueSequence::push(double observed) {
  values_.push_back(values_.empty() ? observed : std::min(values_.back(), observed));
}

double cr(const BestValueSequence& sequence) {
  const auto& f = sequence.values();
  if (f.size() < 2) throw Error("cr: at least 2 iterations are required");
  const bool positive = f.front() > 0.0;
  double sum = 0.0;
  for (std::size_t t = 1; t < f.size(); ++t) {
    const double prev = f[t - 1];
    if (std::abs(prev) <= kDenominatorFloor || (prev > 0.0) != positive) {
      std::ostringstream os;
      os << "cr: best value " << prev << " at iteration " << t - 1
         << " is zero or changes sign; use cr_shifted for sequences that are not strictly of one sign";
      throw Error(os.str());
    }
    sum += (prev - f[t]) / prev;
  }
  return sum / static_cast<double>(f.size() - 1);
}

double cr_shifted(const BestValueSequence& sequence, double shift) {
  if (!(shift > 0.0)) throw Error("cr_shifted: shift must be positive");
  const auto& f = sequence.values();
  if (f.empty()) throw Error("cr: at least 2 iterations are required");
  const double lowest = *std::min_element(f.begin(), f.end());
  std::vector<double> moved(f.size());
  std::transform(f.begin(), f.end(), moved.begin(), [&](double v) { return v - lowest + shift; });
  return cr(BestValueSequence(moved));
}

double os(std::span<const double> final_values) {
  if (final_values.size() < 2) throw Error("os: at least 2 runs are required");
  const auto m = static_cast<double>(final_values.size());
  double mean = 0.0;
  for (double v : final_values) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : final_values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / m);
}

PssaResult pssa(const EvaluatedSet& data, const Matrix& batch, const TreeParams& params) {
  require_dim(batch, data.dim(), "pssa batch");
  const TreeModel tree = fit_tree(data, params);
  PssaResult out;
  out.partitions = extract_partitions(tree);
  out.batch_counts.assign(out.partitions.size(), 0);
  out.batch_assignment.reserve(static_cast<std::size_t>(batch.rows()));
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    const std::size_t leaf = tree.leaf_index(batch.row(i));
    out.batch_assignment.push_back(leaf);
    ++out.batch_counts[leaf];
  }
  return out;
}

}  // namespace iemso
