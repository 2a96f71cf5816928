#pragma once

#include <span>
#include <string>
#include <vector>

#include "iemso/core.hpp"
#include "iemso/surrogate.hpp"

namespace iemso {

enum class Strategy { random, ucb, maximin, pareto };

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy strategy);

struct StrategyConfig {
  Strategy strategy = Strategy::ucb;
  std::size_t batch_size = 4;
  double ucb_beta = 2.0;
};

/// Selected candidate rows. `indices` refer to rows of the candidate set.
struct Selection {
  std::vector<std::size_t> indices;
  Matrix points;
};

/// k distinct rows chosen uniformly without replacement, returned in
/// ascending candidate order.
Selection select_random(const Matrix& candidates, std::size_t k, RngSeed seed);

/// Greedy lower confidence bound mu - beta * sd with constant-liar fantasies
/// at the best observed value; the model is re-conditioned after every pick.
Selection select_greedy_ucb(const GpModel& model, const EvaluatedSet& data, const Matrix& candidates, std::size_t k,
                            double beta);

/// Greedy farthest-point selection against evaluated and already picked points.
Selection select_maximin(const Matrix& evaluated, const Matrix& candidates, std::size_t k);

/// Pareto-layer selection over canonical (mu, -distance) scores; layers larger
/// than the remaining slots are thinned by greedy maximin among the picks.
/// A labeled stand-in for a Pareto-based optimizer, not a reimplementation.
Selection select_pareto(const GpModel& model, const EvaluatedSet& data, const Matrix& candidates, std::size_t k);

/// Pareto-layer selection on precomputed canonical scores (one per candidate).
Selection select_pareto_from_scores(const Matrix& candidates, std::span<const ExploreExploitScore> scores,
                                    std::size_t k);

}  // namespace iemso
