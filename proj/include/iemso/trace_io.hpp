#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iemso/core.hpp"

namespace iemso {

struct PssaEntry {
  std::string rule;
  std::size_t n_eval = 0;
  double mean_y = 0.0;
  std::size_t n_batch = 0;

  friend bool operator==(const PssaEntry&, const PssaEntry&) = default;
};

/// Per-iteration metric values. A disengaged optional serializes as null
/// (metric not applicable or not computable for this iteration).
struct IterationMetrics {
  std::optional<double> pce_avg;
  std::optional<std::vector<double>> pce_per_dim;  // d
  std::optional<std::vector<double>> mdpe;         // k
  std::optional<std::vector<double>> chee_pre;     // k
  std::optional<std::vector<double>> chee_post;    // k
  std::optional<double> des;
  std::optional<double> dis_logdet;
  std::optional<double> abd;
  std::optional<double> hve;
  std::optional<std::array<double, 2>> ref_point;
  std::optional<double> cr;
  std::optional<std::vector<PssaEntry>> pssa;
  std::optional<std::vector<double>> fiee_eta;     // d
  std::optional<std::vector<double>> fiee_lambda;  // d
  std::optional<std::vector<double>> fibb;         // d
  std::optional<std::vector<double>> fis_signed;   // d
  std::optional<std::vector<double>> fis_abs;      // d

  friend bool operator==(const IterationMetrics&, const IterationMetrics&) = default;
};

/// Names of the keys of the `metrics` object, in schema order.
const std::vector<std::string>& metric_keys();

struct IterationTrace {
  std::string run_id;
  std::uint64_t seed = 0;
  std::uint64_t iter = 0;
  Matrix batch;                 // k x d
  std::vector<double> batch_y;  // k
  double best_y = 0.0;
  IterationMetrics metrics;
  nlohmann::json metadata;  // null when absent

  std::size_t batch_size() const { return static_cast<std::size_t>(batch.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(batch.cols()); }
};

bool operator==(const IterationTrace& a, const IterationTrace& b);

nlohmann::json to_json(const IterationTrace& record);
nlohmann::json to_json(const IterationMetrics& metrics);

/// Error while reading a trace. `line` is 1-based; records parsed before the
/// failing line are kept in `partial`.
class TraceReadError : public Error {
 public:
  TraceReadError(const std::filesystem::path& path, std::size_t line, const std::string& message,
                 std::vector<IterationTrace> partial);

  std::size_t line() const { return line_; }
  const std::vector<IterationTrace>& partial() const { return partial_; }

 private:
  std::size_t line_;
  std::vector<IterationTrace> partial_;
};

/// Parses one trace line (the whole JSON object). Throws Error on schema
/// violations. `expected_dim` (0 = unknown) enforces a consistent d.
IterationTrace parse_trace_line(const std::string& text, std::size_t expected_dim = 0);

/// Streams records to a JSON Lines file, one flushed line per record.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path, bool append = false);

  void write(const IterationTrace& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_trace(const std::filesystem::path& path, const std::vector<IterationTrace>& records);
std::vector<IterationTrace> read_trace(const std::filesystem::path& path);

/// Per-iteration evaluated points from an external optimizer.
struct ExternalLog {
  std::vector<EvaluatedSet> iterations;
  std::optional<Bounds> bounds;

  std::size_t dim() const { return iterations.empty() ? 0 : iterations.front().dim(); }
};

/// Reads `x1,...,xd,y` or `iter,x1,...,xd,y`. With an iteration column rows
/// are grouped by ascending iteration number; otherwise every row is its own
/// iteration.
ExternalLog ingest_csv(const std::filesystem::path& path, bool iteration_column_present);

/// Detects the iteration column from the header and calls ingest_csv.
ExternalLog ingest_csv(const std::filesystem::path& path);

/// Writes a trace's batches as `iter,x1..xd,y` rows with round-trip precision.
void export_csv(const std::filesystem::path& path, const std::vector<IterationTrace>& records);

struct RunReport {
  std::vector<std::uint64_t> iterations;
  std::vector<double> best_mean;
  std::vector<double> best_min;
  std::vector<double> best_max;
  std::vector<double> final_best;
  double os = 0.0;
  std::vector<std::optional<double>> cr_per_run;  // null where cr is undefined
  std::optional<double> cr_mean;
};

/// Multi-run summary: per-iteration best_y statistics over the iterations
/// common to every run, optimization stability and convergence rates.
RunReport aggregate_runs(const std::vector<std::vector<IterationTrace>>& runs);

nlohmann::json to_json(const RunReport& report);

}  // namespace iemso
