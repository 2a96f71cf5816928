#include "iemso/importance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iemso/random.hpp"

namespace iemso {

namespace {

Vector checked_predict(const PredictFn& predict, const Matrix& x) {
  Vector y = predict(x);
  if (y.size() != x.rows()) {
    throw DimensionError("predict function output", static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.size()));
  }
  if (!y.allFinite()) throw Error("predict function returned non-finite values");
  return y;
}

double mse(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

// Mean |phi| over (a capped subsample of) the rows of x.
Vector mean_abs_shapley(const PredictFn& predict, const Matrix& x, const ImportanceSettings& settings, RngSeed seed) {
  const Matrix background = capped_rows(x, settings.background_cap, derive_seed(seed, "background"));
  const Matrix explained = capped_rows(x, settings.explained_cap, derive_seed(seed, "explained"));
  Vector acc = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < explained.rows(); ++i) {
    const auto est = shapley_sampling(predict, explained.row(i), background, settings.shapley_samples,
                                      derive_seed(seed, "point", static_cast<std::uint64_t>(i)));
    acc += est.phi.cwiseAbs();
  }
  return acc / static_cast<double>(explained.rows());
}

}  // namespace

ImportanceMethod parse_importance_method(const std::string& name) {
  if (name == "permutation") return ImportanceMethod::permutation;
  if (name == "shapley") return ImportanceMethod::shapley;
  throw Error("unknown feature-importance method '" + name + "' (expected permutation or shapley)");
}

ExplorationSource parse_exploration_source(const std::string& name) {
  if (name == "surrogate") return ExplorationSource::surrogate;
  if (name == "distance") return ExplorationSource::distance;
  throw Error("unknown exploration source '" + name + "' (expected surrogate or distance)");
}

std::string to_string(ImportanceMethod method) {
  return method == ImportanceMethod::permutation ? "permutation" : "shapley";
}

std::string to_string(ImportanceTarget target) {
  switch (target) {
    case ImportanceTarget::objective: return "objective";
    case ImportanceTarget::exploitation: return "exploitation";
    case ImportanceTarget::exploration: return "exploration";
    case ImportanceTarget::surrogate: return "surrogate";
  }
  return "unknown";
}

std::string to_string(ExplorationSource source) {
  return source == ExplorationSource::surrogate ? "surrogate" : "distance";
}

ImportanceVector permutation_importance(const PredictFn& predict, const Matrix& x, const Vector& y_ref,
                                        std::size_t repeats, RngSeed seed, ImportanceTarget target) {
  if (x.rows() < 5) throw Error("permutation_importance: at least 5 rows are required");
  if (repeats == 0) throw Error("permutation_importance: repeats must be positive");
  if (y_ref.size() != x.rows()) {
    throw DimensionError("permutation_importance y_ref", static_cast<std::size_t>(x.rows()),
                         static_cast<std::size_t>(y_ref.size()));
  }
  const auto n = static_cast<std::size_t>(x.rows());
  const double baseline = mse(checked_predict(predict, x), y_ref);

  ImportanceVector out;
  out.method = ImportanceMethod::permutation;
  out.target = target;
  out.scores = Vector::Zero(x.cols());

  // All shuffled copies of one feature go through a single predict call.
  Matrix stacked(static_cast<Eigen::Index>(n * repeats), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Rng rng(derive_seed(seed, "permutation", static_cast<std::uint64_t>(j)));
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto order = rng.permutation(n);
      const auto offset = static_cast<Eigen::Index>(r * n);
      stacked.middleRows(offset, x.rows()) = x;
      for (std::size_t i = 0; i < n; ++i) {
        stacked(offset + static_cast<Eigen::Index>(i), j) = x(static_cast<Eigen::Index>(order[i]), j);
      }
    }
    const Vector pred = checked_predict(predict, stacked);
    double increase = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto offset = static_cast<Eigen::Index>(r * n);
      increase += mse(pred.segment(offset, x.rows()), y_ref) - baseline;
    }
    out.scores[j] = increase / static_cast<double>(repeats);
  }
  return out;
}

ShapleyEstimate shapley_sampling(const PredictFn& predict, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 const Matrix& background, std::size_t samples, RngSeed seed) {
  if (background.rows() == 0) throw Error("shapley_sampling: empty background");
  if (samples == 0) throw Error("shapley_sampling: samples must be positive");
  if (x.size() != background.cols()) {
    throw DimensionError("shapley_sampling point", static_cast<std::size_t>(background.cols()),
                         static_cast<std::size_t>(x.size()));
  }
  const auto d = static_cast<std::size_t>(x.size());
  const auto rows_per_sample = static_cast<Eigen::Index>(d + 1);
  Rng rng(seed);

  std::vector<std::vector<std::size_t>> orders(samples);
  Matrix path(static_cast<Eigen::Index>(samples) * rows_per_sample, x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    orders[s] = rng.permutation(d);
    const auto b = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(background.rows())));
    const Eigen::Index base = static_cast<Eigen::Index>(s) * rows_per_sample;
    path.row(base) = background.row(b);
    for (std::size_t t = 0; t < d; ++t) {
      const Eigen::Index r = base + static_cast<Eigen::Index>(t) + 1;
      path.row(r) = path.row(r - 1);
      const auto j = static_cast<Eigen::Index>(orders[s][t]);
      path(r, j) = x[j];
    }
  }
  const Vector f = checked_predict(predict, path);

  Vector sum = Vector::Zero(x.size());
  Vector sum_sq = Vector::Zero(x.size());
  double total_sum = 0.0, total_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * rows_per_sample;
    for (std::size_t t = 0; t < d; ++t) {
      const Eigen::Index r = base + static_cast<Eigen::Index>(t) + 1;
      const double delta = f[r] - f[r - 1];
      const auto j = static_cast<Eigen::Index>(orders[s][t]);
      sum[j] += delta;
      sum_sq[j] += delta * delta;
    }
    const double total = f[base + rows_per_sample - 1] - f[base];
    total_sum += total;
    total_sq += total * total;
  }

  const auto m = static_cast<double>(samples);
  auto std_err = [m](double s, double sq) {
    if (m < 2.0) return 0.0;
    const double var = std::max(0.0, (sq - s * s / m) / (m - 1.0));
    return std::sqrt(var / m);
  };

  ShapleyEstimate out;
  out.phi = sum / m;
  out.std_error.resize(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out.std_error[j] = std_err(sum[j], sum_sq[j]);
  out.total_std_error = std_err(total_sum, total_sq);
  out.prediction = checked_predict(predict, Matrix(x))[0];
  out.background_mean = checked_predict(predict, background).mean();
  return out;
}

Matrix capped_rows(const Matrix& points, std::size_t cap, RngSeed seed) {
  if (static_cast<std::size_t>(points.rows()) <= cap) return points;
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(static_cast<std::size_t>(points.rows()), cap);
  std::sort(picked.begin(), picked.end());
  return take_rows(points, picked);
}

FieeResult fiee(const GpModel& model, const EvaluatedSet& data, const ImportanceSettings& settings,
                ExplorationSource exploration, RngSeed seed) {
  if (data.empty()) throw Error("fiee: empty evaluated set");
  const PredictFn exploit = [&model](const Matrix& p) { return model.predict_mean(p); };
  const PredictFn explore = exploration == ExplorationSource::surrogate
                                ? PredictFn([&model](const Matrix& p) { return model.predict_std(p); })
                                : PredictFn([&data](const Matrix& p) { return distance_exploration(data.points(), p); });

  auto importance = [&](const PredictFn& fn, ImportanceTarget target, std::string_view label) {
    ImportanceVector v;
    v.method = settings.method;
    v.target = target;
    const RngSeed sub = derive_seed(seed, label);
    if (settings.method == ImportanceMethod::permutation) {
      v.scores = permutation_importance(fn, data.points(), checked_predict(fn, data.points()), settings.repeats, sub,
                                        target)
                     .scores.cwiseAbs();
    } else {
      v.scores = mean_abs_shapley(fn, data.points(), settings, sub);
    }
    return v;
  };

  FieeResult out;
  out.lambda = importance(exploit, ImportanceTarget::exploitation, "fiee-lambda");
  out.eta = importance(explore, ImportanceTarget::exploration, "fiee-eta");
  return out;
}

ImportanceVector fibb(const EvaluatedSet& data, const ImportanceSettings& settings, const TreeParams& tree_params,
                      RngSeed seed) {
  const TreeModel tree = fit_tree(data, tree_params);
  const PredictFn fn = [&tree](const Matrix& p) { return tree.predict(p); };
  ImportanceVector v;
  v.method = settings.method;
  v.target = ImportanceTarget::objective;
  if (settings.method == ImportanceMethod::permutation) {
    v.scores = permutation_importance(fn, data.points(), data.values(), settings.repeats, seed,
                                      ImportanceTarget::objective)
                   .scores.cwiseAbs();
  } else {
    v.scores = mean_abs_shapley(fn, data.points(), settings, seed);
  }
  return v;
}

FisResult fis(const PredictFn& predict, const Matrix& x, const Matrix& background, std::size_t samples,
              RngSeed seed) {
  if (x.rows() == 0) throw Error("fis: no points to explain");
  FisResult out;
  out.signed_mean = Vector::Zero(x.cols());
  out.abs_mean = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto est = shapley_sampling(predict, x.row(i), background, samples,
                                      derive_seed(seed, "fis", static_cast<std::uint64_t>(i)));
    out.signed_mean += est.phi;
    out.abs_mean += est.phi.cwiseAbs();
  }
  out.signed_mean /= static_cast<double>(x.rows());
  out.abs_mean /= static_cast<double>(x.rows());
  return out;
}

FisResult fis(const TreeModel& model, const Matrix& x, const Matrix& background, std::size_t samples, RngSeed seed) {
  return fis([&model](const Matrix& p) { return model.predict(p); }, x, background, samples, seed);
}

FisResult fis(const GpModel& model, const Matrix& x, const Matrix& background, std::size_t samples, RngSeed seed) {
  return fis([&model](const Matrix& p) { return model.predict_mean(p); }, x, background, samples, seed);
}

}  // namespace iemso
