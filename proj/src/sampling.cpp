#include "iemso/sampling.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "iemso/metrics.hpp"
#include "iemso/random.hpp"

namespace iemso {

namespace {

bool same_row(const Matrix& m, std::size_t a, std::size_t b) {
  return (m.row(static_cast<Eigen::Index>(a)).array() == m.row(static_cast<Eigen::Index>(b)).array()).all();
}

bool duplicates_any(const Matrix& m, std::size_t row, const std::vector<std::size_t>& picked) {
  return std::any_of(picked.begin(), picked.end(), [&](std::size_t p) { return same_row(m, row, p); });
}

void check_request(const Matrix& candidates, std::size_t k, const char* who) {
  if (k == 0) throw Error(std::string(who) + ": batch size must be positive");
  if (k > static_cast<std::size_t>(candidates.rows())) {
    std::ostringstream os;
    os << who << ": batch size " << k << " exceeds candidate count " << candidates.rows();
    throw Error(os.str());
  }
  std::set<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    rows.insert(std::vector<double>(candidates.row(i).begin(), candidates.row(i).end()));
    if (rows.size() >= k) return;
  }
  throw Error(std::string(who) + ": degenerate candidate set (fewer distinct rows than the batch size)");
}

Selection finish(const Matrix& candidates, std::vector<std::size_t> indices) {
  Selection out;
  out.points = take_rows(candidates, indices);
  out.indices = std::move(indices);
  return out;
}

// Greedily extends `picked` with `need` members of `pool`, each maximizing the
// minimum distance to the points picked so far. With nothing picked, the first
// two picks are the farthest pair of the pool (one pick: the pool's first entry).
void greedy_maximin_fill(const Matrix& candidates, const std::vector<std::size_t>& pool, std::size_t need,
                         std::vector<std::size_t>& picked) {
  std::vector<std::size_t> rest(pool);
  auto dist = [&](std::size_t a, std::size_t b) {
    return (candidates.row(static_cast<Eigen::Index>(a)) - candidates.row(static_cast<Eigen::Index>(b))).norm();
  };
  auto take = [&](std::size_t pos) {
    picked.push_back(rest[pos]);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
    --need;
  };
  if (need == 0) return;
  if (picked.empty()) {
    if (need == 1) {
      take(0);
      return;
    }
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      for (std::size_t j = i + 1; j < rest.size(); ++j) {
        const double dd = dist(rest[i], rest[j]);
        const auto lo = std::min(rest[i], rest[j]);
        const auto blo = std::min(rest[bi], rest[bj]);
        if (dd > best || (dd == best && lo < blo)) {
          best = dd;
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t first = std::min(rest[bi], rest[bj]) == rest[bi] ? bi : bj;
    const std::size_t second = first == bi ? bj : bi;
    const std::size_t second_id = rest[second];
    take(first);
    take(static_cast<std::size_t>(std::find(rest.begin(), rest.end(), second_id) - rest.begin()));
  }
  while (need > 0 && !rest.empty()) {
    std::size_t best_pos = 0;
    double best = -1.0;
    for (std::size_t pos = 0; pos < rest.size(); ++pos) {
      double closest = std::numeric_limits<double>::infinity();
      for (auto p : picked) closest = std::min(closest, dist(rest[pos], p));
      if (closest > best || (closest == best && rest[pos] < rest[best_pos])) {
        best = closest;
        best_pos = pos;
      }
    }
    take(best_pos);
  }
}

}  // namespace

Strategy parse_strategy(const std::string& name) {
  if (name == "random") return Strategy::random;
  if (name == "ucb") return Strategy::ucb;
  if (name == "maximin") return Strategy::maximin;
  if (name == "pareto") return Strategy::pareto;
  throw Error("unknown strategy '" + name + "' (expected random, ucb, maximin or pareto)");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::random: return "random";
    case Strategy::ucb: return "ucb";
    case Strategy::maximin: return "maximin";
    case Strategy::pareto: return "pareto";
  }
  return "unknown";
}

Selection select_random(const Matrix& candidates, std::size_t k, RngSeed seed) {
  check_request(candidates, k, "select_random");
  Rng rng(seed);
  const auto order = rng.permutation(static_cast<std::size_t>(candidates.rows()));
  std::vector<std::size_t> picked;
  for (auto i : order) {
    if (picked.size() == k) break;
    if (!duplicates_any(candidates, i, picked)) picked.push_back(i);
  }
  std::sort(picked.begin(), picked.end());
  return finish(candidates, std::move(picked));
}

Selection select_greedy_ucb(const GpModel& model, const EvaluatedSet& data, const Matrix& candidates, std::size_t k,
                            double beta) {
  check_request(candidates, k, "select_greedy_ucb");
  if (data.empty()) throw Error("select_greedy_ucb: empty evaluated set");
  require_dim(candidates, model.dim(), "select_greedy_ucb candidates");
  const double liar = data.values().minCoeff();

  EvaluatedSet augmented = data;
  GpModel current = model;
  std::vector<std::size_t> picked;
  std::vector<char> used(static_cast<std::size_t>(candidates.rows()), 0);
  Vector mean, sd;
  while (picked.size() < k) {
    current.predict(candidates, mean, sd);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    bool found = false;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
      const auto c = static_cast<std::size_t>(i);
      if (used[c] || duplicates_any(candidates, c, picked)) continue;
      const double acq = mean[i] - beta * sd[i];
      if (!found || acq < best_value) {
        best = c;
        best_value = acq;
        found = true;
      }
    }
    picked.push_back(best);
    used[best] = 1;
    if (picked.size() < k) {
      augmented.append(candidates.row(static_cast<Eigen::Index>(best)), Vector::Constant(1, liar));
      current = model.refit(augmented);
    }
  }
  return finish(candidates, std::move(picked));
}

Selection select_maximin(const Matrix& evaluated, const Matrix& candidates, std::size_t k) {
  check_request(candidates, k, "select_maximin");
  if (evaluated.rows() == 0) throw Error("select_maximin: empty evaluated set");
  Vector closest = min_distance(candidates, evaluated);
  std::vector<std::size_t> picked;
  std::vector<char> used(static_cast<std::size_t>(candidates.rows()), 0);
  while (picked.size() < k) {
    std::size_t best = 0;
    double best_value = -1.0;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
      const auto c = static_cast<std::size_t>(i);
      if (used[c] || duplicates_any(candidates, c, picked)) continue;
      if (closest[i] > best_value) {
        best = c;
        best_value = closest[i];
      }
    }
    picked.push_back(best);
    used[best] = 1;
    const auto row = candidates.row(static_cast<Eigen::Index>(best));
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
      closest[i] = std::min(closest[i], (candidates.row(i) - row).norm());
    }
  }
  return finish(candidates, std::move(picked));
}

Selection select_pareto_from_scores(const Matrix& candidates, std::span<const ExploreExploitScore> scores,
                                    std::size_t k) {
  check_request(candidates, k, "select_pareto");
  if (scores.size() != static_cast<std::size_t>(candidates.rows())) {
    throw DimensionError("select_pareto scores", static_cast<std::size_t>(candidates.rows()), scores.size());
  }
  std::vector<std::size_t> picked;
  for (const auto& layer : pareto_layers(scores)) {
    if (picked.size() == k) break;
    std::vector<std::size_t> pool;
    for (auto i : layer.members) {
      if (!duplicates_any(candidates, i, picked)) pool.push_back(i);
    }
    const std::size_t need = k - picked.size();
    if (pool.size() <= need) {
      picked.insert(picked.end(), pool.begin(), pool.end());
    } else {
      greedy_maximin_fill(candidates, pool, need, picked);
    }
  }
  if (picked.size() < k) throw Error("select_pareto: degenerate candidate set");
  return finish(candidates, std::move(picked));
}

Selection select_pareto(const GpModel& model, const EvaluatedSet& data, const Matrix& candidates, std::size_t k) {
  check_request(candidates, k, "select_pareto");
  const Vector mu = model.predict_mean(candidates);
  const Vector dist = distance_exploration(data.points(), candidates);
  std::vector<ExploreExploitScore> scores(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    scores[static_cast<std::size_t>(i)] = ExploreExploitScore::from_raw(mu[i], dist[i]);
  }
  return select_pareto_from_scores(candidates, scores, k);
}

}  // namespace iemso
