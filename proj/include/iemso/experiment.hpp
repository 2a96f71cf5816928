#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iemso/core.hpp"
#include "iemso/importance.hpp"
#include "iemso/sampling.hpp"
#include "iemso/surrogate.hpp"
#include "iemso/trace_io.hpp"

namespace iemso {

struct RunConfig {
  std::string problem = "branin";
  std::size_t dim = 2;
  Strategy strategy = Strategy::ucb;
  std::optional<std::size_t> batch_size;  ///< protocol default when unset
  std::size_t iterations = 30;
  std::optional<std::size_t> candidates;  ///< protocol default when unset
  std::optional<std::size_t> init_size;   ///< 2 * (d + 1) when unset
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::filesystem::path out = "iemso_out";
  TreeParams tree;
  double ucb_beta = 2.0;
  ImportanceMethod fi_method = ImportanceMethod::permutation;
  ExplorationSource exploration = ExplorationSource::surrogate;
  bool latin_hypercube = false;
  std::size_t threads = 0;  ///< concurrent runs; 0 = hardware concurrency

  std::size_t effective_batch_size() const;
  std::size_t effective_candidates() const;
  std::size_t effective_init_size() const;
  /// Throws Error on an inconsistent configuration.
  void validate() const;
};

/// Batch size and candidate count used by the reference protocol for a
/// d-dimensional problem: (4, 100) for d <= 2, (4, 1000) for d < 10, else (8, 1000).
std::pair<std::size_t, std::size_t> protocol_defaults(std::size_t dim);

struct RunResult {
  std::string run_id;
  std::uint64_t seed = 0;
  std::filesystem::path trace_path;
  std::uint64_t evaluations_used = 0;
  double best_y = 0.0;
};

/// Raised when a run fails after its trace was opened; the partial trace stays on disk.
class RunError : public Error {
 public:
  RunError(const std::string& message, std::filesystem::path trace_path)
      : Error(message), trace_path_(std::move(trace_path)) {}
  const std::filesystem::path& trace_path() const { return trace_path_; }

 private:
  std::filesystem::path trace_path_;
};

/// One instrumented optimization run (run index `run`, seed = config.seed + run),
/// written to `<out>/run_<run>.jsonl`.
RunResult run_single(const RunConfig& config, std::size_t run);

/// All runs of the configuration; distinct runs execute concurrently.
std::vector<RunResult> run_experiment(const RunConfig& config);

struct AnalyzeOptions {
  std::optional<Bounds> bounds;  ///< data range of the whole log when unset
  bool with_surrogate = false;
  TreeParams tree;
  ImportanceMethod fi_method = ImportanceMethod::permutation;
  std::uint64_t seed = 0;
  std::string run_id = "analysis";
};

struct AnalysisResult {
  std::vector<IterationTrace> records;
  std::vector<std::string> warnings;
};

/// Metrics for an external optimization log: iteration t is the batch and all
/// earlier iterations form the evaluated set.
AnalysisResult analyze_log(const ExternalLog& log, const AnalyzeOptions& options);

/// Reads the CSV, analyzes it and writes `<out>/run_<run_id>.jsonl` plus the
/// report files. Nothing is written when ingestion fails.
AnalysisResult analyze_csv(const std::filesystem::path& csv, const std::filesystem::path& out,
                           const AnalyzeOptions& options, std::size_t top_k = 10);

struct ReportFiles {
  std::vector<std::filesystem::path> written;
  std::size_t runs = 0;
};

/// Per-metric CSV series, top-k feature tables and summary.json for every
/// `run_*.jsonl` under `trace_dir`.
ReportFiles write_report(const std::filesystem::path& trace_dir, std::size_t top_k);

/// Scalar metric series written by write_report (file `metric_<name>.csv`).
const std::vector<std::string>& report_series();

}  // namespace iemso
