#pragma once

#include <functional>
#include <string>

#include "iemso/core.hpp"
#include "iemso/surrogate.hpp"

namespace iemso {

/// Maps an (n x d) point matrix to n predictions.
using PredictFn = std::function<Vector(const Matrix&)>;

enum class ImportanceMethod { permutation, shapley };
enum class ImportanceTarget { objective, exploitation, exploration, surrogate };
/// What stands in for the exploration metric when explaining it.
enum class ExplorationSource { surrogate, distance };

ImportanceMethod parse_importance_method(const std::string& name);
ExplorationSource parse_exploration_source(const std::string& name);
std::string to_string(ImportanceMethod method);
std::string to_string(ImportanceTarget target);
std::string to_string(ExplorationSource source);

struct ImportanceVector {
  Vector scores;
  ImportanceMethod method = ImportanceMethod::permutation;
  ImportanceTarget target = ImportanceTarget::surrogate;
};

struct ImportanceSettings {
  ImportanceMethod method = ImportanceMethod::permutation;
  std::size_t repeats = 10;           ///< permutation shuffles per feature
  std::size_t shapley_samples = 128;  ///< permutations per explained point
  std::size_t background_cap = 256;   ///< background rows kept for Shapley
  std::size_t explained_cap = 64;     ///< points explained for Shapley-based FIEE/FIBB
};

/// Mean increase in squared error against `y_ref` when column j is shuffled.
ImportanceVector permutation_importance(const PredictFn& predict, const Matrix& x, const Vector& y_ref,
                                        std::size_t repeats, RngSeed seed,
                                        ImportanceTarget target = ImportanceTarget::surrogate);

struct ShapleyEstimate {
  Vector phi;              ///< per-feature attribution
  Vector std_error;        ///< Monte-Carlo standard error of each phi_j
  double total_std_error;  ///< standard error of sum(phi)
  double prediction;       ///< f(x)
  double background_mean;  ///< mean of f over the whole background

  /// sum(phi) - (f(x) - background mean)
  double efficiency_residual() const { return phi.sum() - (prediction - background_mean); }
};

/// Permutation-sampling Shapley values with marginal replacement: each sample
/// draws a feature order and a background row, then switches features from
/// the background row to `x` one at a time.
ShapleyEstimate shapley_sampling(const PredictFn& predict, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 const Matrix& background, std::size_t samples, RngSeed seed);

/// Uniform subsample of at most `cap` rows (all rows when already small enough).
Matrix capped_rows(const Matrix& points, std::size_t cap, RngSeed seed);

struct FieeResult {
  ImportanceVector eta;     ///< exploration
  ImportanceVector lambda;  ///< exploitation
};

/// Importance of each feature for the surrogate mean (lambda) and for the
/// exploration score (eta), evaluated over the evaluated points.
FieeResult fiee(const GpModel& model, const EvaluatedSet& data, const ImportanceSettings& settings,
                ExplorationSource exploration, RngSeed seed);

/// Importance of each feature for the observed objective, through a
/// reference regression tree fitted to the evaluated set.
ImportanceVector fibb(const EvaluatedSet& data, const ImportanceSettings& settings, const TreeParams& tree,
                      RngSeed seed);

struct FisResult {
  Vector signed_mean;  ///< (1/n) sum phi_j(x_i)
  Vector abs_mean;     ///< (1/n) sum |phi_j(x_i)|
};

/// Mean Shapley attribution of the model's predictions over the rows of `x`.
FisResult fis(const PredictFn& predict, const Matrix& x, const Matrix& background, std::size_t samples,
              RngSeed seed);
FisResult fis(const TreeModel& model, const Matrix& x, const Matrix& background, std::size_t samples, RngSeed seed);
FisResult fis(const GpModel& model, const Matrix& x, const Matrix& background, std::size_t samples, RngSeed seed);

}  // namespace iemso
