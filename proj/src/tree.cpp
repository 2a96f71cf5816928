#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "iemso/surrogate.hpp"

namespace iemso {

namespace {

constexpr double kMinGain = 1e-12;
constexpr double kTieTolerance = 1e-12;

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

LeafStats leaf_stats(const Vector& y, const std::vector<std::size_t>& idx) {
  LeafStats s;
  s.count = idx.size();
  double sum = 0.0;
  for (auto i : idx) sum += y[static_cast<Eigen::Index>(i)];
  s.mean = sum / static_cast<double>(idx.size());
  double ss = 0.0;
  for (auto i : idx) {
    const double c = y[static_cast<Eigen::Index>(i)] - s.mean;
    ss += c * c;
  }
  s.variance = ss / static_cast<double>(idx.size());
  return s;
}

// Best variance-reducing split of the rows in `idx`. The gain is the drop in
// sum of squared errors divided by the node size (weighted variance reduction).
SplitChoice best_split(const Matrix& x, const Vector& y, const std::vector<std::size_t>& idx, std::size_t min_leaf,
                       double node_mean) {
  SplitChoice best;
  const std::size_t n = idx.size();
  if (n < 2 * min_leaf) return best;

  double parent_ss = 0.0;
  for (auto i : idx) {
    const double c = y[static_cast<Eigen::Index>(i)] - node_mean;
    parent_ss += c * c;
  }

  std::vector<std::size_t> order(idx);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
    });
    double left_sum = 0.0, left_sq = 0.0;
    double total_sum = 0.0, total_sq = 0.0;
    for (auto i : order) {
      const double c = y[static_cast<Eigen::Index>(i)] - node_mean;
      total_sum += c;
      total_sq += c * c;
    }
    for (std::size_t pos = 1; pos < n; ++pos) {
      const double c = y[static_cast<Eigen::Index>(order[pos - 1])] - node_mean;
      left_sum += c;
      left_sq += c * c;
      const double lo = x(static_cast<Eigen::Index>(order[pos - 1]), f);
      const double hi = x(static_cast<Eigen::Index>(order[pos]), f);
      if (!(lo < hi)) continue;
      if (pos < min_leaf || n - pos < min_leaf) continue;
      const auto nl = static_cast<double>(pos);
      const auto nr = static_cast<double>(n - pos);
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
      const double gain = (parent_ss - sse) / static_cast<double>(n);
      // Strict improvement beyond rounding keeps the earliest (feature, threshold).
      if (!best.found || gain > best.gain + kTieTolerance * std::max(1.0, std::abs(best.gain))) {
        best.found = true;
        best.feature = static_cast<std::size_t>(f);
        best.threshold = 0.5 * (lo + hi);
        best.gain = gain;
      }
    }
  }
  if (best.found && best.gain < kMinGain) best.found = false;
  return best;
}

std::size_t grow(std::vector<TreeModel::Node>& nodes, const Matrix& x, const Vector& y,
                 const std::vector<std::size_t>& idx, std::size_t depth, const TreeParams& params) {
  const std::size_t id = nodes.size();
  nodes.emplace_back();
  nodes[id].stats = leaf_stats(y, idx);
  if (depth >= params.max_depth) return id;

  const SplitChoice split = best_split(x, y, idx, params.min_leaf, nodes[id].stats.mean);
  if (!split.found) return id;

  std::vector<std::size_t> left, right;
  for (auto i : idx) {
    (x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(split.feature)) <= split.threshold ? left : right)
        .push_back(i);
  }
  nodes[id].leaf = false;
  nodes[id].feature = split.feature;
  nodes[id].threshold = split.threshold;
  const std::size_t l = grow(nodes, x, y, left, depth + 1, params);
  const std::size_t r = grow(nodes, x, y, right, depth + 1, params);
  nodes[id].left = l;
  nodes[id].right = r;
  return id;
}

void assign_leaf_ids(std::vector<TreeModel::Node>& nodes, std::size_t id, std::size_t& next) {
  if (nodes[id].leaf) {
    nodes[id].leaf_id = next++;
    return;
  }
  assign_leaf_ids(nodes, nodes[id].left, next);
  assign_leaf_ids(nodes, nodes[id].right, next);
}

void collect(const std::vector<TreeModel::Node>& nodes, std::size_t id, std::vector<SplitRule>& path,
             std::vector<Partition>& out) {
  const auto& node = nodes[id];
  if (node.leaf) {
    out.push_back(Partition{path, node.stats});
    return;
  }
  path.push_back({node.feature, Comparison::less_equal, node.threshold});
  collect(nodes, node.left, path, out);
  path.back().comparison = Comparison::greater;
  collect(nodes, node.right, path, out);
  path.pop_back();
}

}  // namespace

bool SplitRule::holds(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const double v = x[static_cast<Eigen::Index>(feature)];
  return comparison == Comparison::less_equal ? v <= threshold : v > threshold;
}

bool Partition::contains(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return std::all_of(rules.begin(), rules.end(), [&](const SplitRule& r) { return r.holds(x); });
}

std::string Partition::rule_string() const {
  if (rules.empty()) return "ALL";
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i > 0) out += " AND ";
    std::snprintf(buf, sizeof buf, "x%zu %s %.4f", rules[i].feature + 1,
                  rules[i].comparison == Comparison::less_equal ? "<=" : ">", rules[i].threshold);
    out += buf;
  }
  return out;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::size_t TreeModel::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[id].leaf) {
      stack.emplace_back(nodes_[id].left, d + 1);
      stack.emplace_back(nodes_[id].right, d + 1);
    }
  }
  return best;
}

std::size_t TreeModel::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionError("tree input", dim_, static_cast<std::size_t>(x.size()));
  std::size_t id = 0;
  while (!nodes_[id].leaf) {
    id = x[static_cast<Eigen::Index>(nodes_[id].feature)] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
  }
  return nodes_[id].leaf_id;
}

double TreeModel::predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::size_t id = 0;
  while (!nodes_[id].leaf) {
    id = x[static_cast<Eigen::Index>(nodes_[id].feature)] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
  }
  return nodes_[id].stats.mean;
}

Vector TreeModel::predict(const Matrix& points) const {
  require_dim(points, dim_, "tree input");
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = predict_one(points.row(i));
  return out;
}

TreeModel fit_tree(const EvaluatedSet& data, const TreeParams& params) {
  if (params.max_depth == 0 || params.min_leaf == 0) throw Error("fit_tree: max_depth and min_leaf must be positive");
  if (data.size() < 2 * params.min_leaf) {
    std::ostringstream os;
    os << "fit_tree: insufficient data (" << data.size() << " rows, need at least " << 2 * params.min_leaf << ")";
    throw Error(os.str());
  }
  TreeModel model;
  model.dim_ = data.dim();
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  grow(model.nodes_, data.points(), data.values(), idx, 0, params);
  std::size_t next = 0;
  assign_leaf_ids(model.nodes_, 0, next);
  return model;
}

std::vector<Partition> extract_partitions(const TreeModel& model) {
  std::vector<Partition> out;
  std::vector<SplitRule> path;
  if (!model.nodes_.empty()) collect(model.nodes_, 0, path, out);
  return out;
}

}  // namespace iemso
