#include "iemso/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "iemso/process.hpp"

namespace iemso {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json pssa_json(const std::vector<PssaEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"rule", e.rule}, {"n_eval", e.n_eval}, {"mean_y", e.mean_y}, {"n_batch", e.n_batch}});
  }
  return arr;
}

[[noreturn]] void schema_error(const std::string& message) { throw Error(message); }

const json& require_key(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error("missing required key '" + key + "'" + where);
  return *it;
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) schema_error("key '" + key + "' must be a number");
  return v.get<double>();
}

std::optional<double> opt_number(const json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  return as_number(v, key);
}

std::optional<std::vector<double>> opt_vector(const json& v, const std::string& key, std::size_t length) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_array()) schema_error("key '" + key + "' must be an array");
  if (v.size() != length) {
    std::ostringstream os;
    os << "key '" << key << "' has length " << v.size() << ", expected " << length;
    schema_error(os.str());
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, key));
  return out;
}

std::uint64_t as_unsigned(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    schema_error("key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

const std::vector<std::string>& metric_keys() {
  static const std::vector<std::string> keys = {
      "pce_avg", "pce_per_dim", "mdpe", "chee_pre", "chee_post",   "des", "dis_logdet", "abd", "hve",
      "ref_point", "cr", "pssa", "fiee_eta", "fiee_lambda", "fibb", "fis_signed", "fis_abs"};
  return keys;
}

bool operator==(const IterationTrace& a, const IterationTrace& b) {
  return a.run_id == b.run_id && a.seed == b.seed && a.iter == b.iter && a.batch.rows() == b.batch.rows() &&
         a.batch.cols() == b.batch.cols() && (a.batch.array() == b.batch.array()).all() && a.batch_y == b.batch_y &&
         a.best_y == b.best_y && a.metrics == b.metrics && a.metadata == b.metadata;
}

json to_json(const IterationMetrics& m) {
  json out = json::object();
  out["pce_avg"] = opt(m.pce_avg);
  out["pce_per_dim"] = opt(m.pce_per_dim);
  out["mdpe"] = opt(m.mdpe);
  out["chee_pre"] = opt(m.chee_pre);
  out["chee_post"] = opt(m.chee_post);
  out["des"] = opt(m.des);
  out["dis_logdet"] = opt(m.dis_logdet);
  out["abd"] = opt(m.abd);
  out["hve"] = opt(m.hve);
  out["ref_point"] = opt(m.ref_point);
  out["cr"] = opt(m.cr);
  out["pssa"] = m.pssa ? pssa_json(*m.pssa) : json(nullptr);
  out["fiee_eta"] = opt(m.fiee_eta);
  out["fiee_lambda"] = opt(m.fiee_lambda);
  out["fibb"] = opt(m.fibb);
  out["fis_signed"] = opt(m.fis_signed);
  out["fis_abs"] = opt(m.fis_abs);
  return out;
}

json to_json(const IterationTrace& r) {
  json batch = json::array();
  for (Eigen::Index i = 0; i < r.batch.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.batch.cols(); ++j) row.push_back(r.batch(i, j));
    batch.push_back(std::move(row));
  }
  json out = {{"run_id", r.run_id},   {"seed", r.seed},     {"iter", r.iter},
              {"batch", batch},       {"batch_y", r.batch_y}, {"best_y", r.best_y},
              {"metrics", to_json(r.metrics)}};
  if (!r.metadata.is_null()) out["metadata"] = r.metadata;
  return out;
}

IterationTrace parse_trace_line(const std::string& text, std::size_t expected_dim) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) schema_error("trace line must be a JSON object");

  IterationTrace r;
  const auto& run_id = require_key(obj, "run_id", "");
  if (!run_id.is_string()) schema_error("key 'run_id' must be a string");
  r.run_id = run_id.get<std::string>();
  r.seed = as_unsigned(require_key(obj, "seed", ""), "seed");
  r.iter = as_unsigned(require_key(obj, "iter", ""), "iter");

  const auto& batch = require_key(obj, "batch", "");
  if (!batch.is_array()) schema_error("key 'batch' must be an array of rows");
  const std::size_t k = batch.size();
  std::size_t d = expected_dim;
  if (k > 0) {
    if (!batch[0].is_array()) schema_error("key 'batch' must be an array of rows");
    if (d == 0) d = batch[0].size();
  }
  r.batch.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < k; ++i) {
    const auto& row = batch[i];
    if (!row.is_array() || row.size() != d) {
      std::ostringstream os;
      os << "batch row " << i << " must have " << d << " coordinates";
      schema_error(os.str());
    }
    for (std::size_t j = 0; j < d; ++j) r.batch(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = as_number(row[j], "batch");
  }
  auto batch_y = opt_vector(require_key(obj, "batch_y", ""), "batch_y", k);
  if (!batch_y) schema_error("key 'batch_y' must be an array");
  r.batch_y = std::move(*batch_y);
  r.best_y = as_number(require_key(obj, "best_y", ""), "best_y");

  const auto& m = require_key(obj, "metrics", "");
  if (!m.is_object()) schema_error("key 'metrics' must be an object");
  for (const auto& key : m.items()) {
    if (std::find(metric_keys().begin(), metric_keys().end(), key.key()) == metric_keys().end()) {
      schema_error("unknown metric key '" + key.key() + "'");
    }
  }
  const std::string in_metrics = " in 'metrics'";
  auto& out = r.metrics;
  out.pce_avg = opt_number(require_key(m, "pce_avg", in_metrics), "pce_avg");
  out.pce_per_dim = opt_vector(require_key(m, "pce_per_dim", in_metrics), "pce_per_dim", d);
  out.mdpe = opt_vector(require_key(m, "mdpe", in_metrics), "mdpe", k);
  out.chee_pre = opt_vector(require_key(m, "chee_pre", in_metrics), "chee_pre", k);
  out.chee_post = opt_vector(require_key(m, "chee_post", in_metrics), "chee_post", k);
  out.des = opt_number(require_key(m, "des", in_metrics), "des");
  out.dis_logdet = opt_number(require_key(m, "dis_logdet", in_metrics), "dis_logdet");
  out.abd = opt_number(require_key(m, "abd", in_metrics), "abd");
  out.hve = opt_number(require_key(m, "hve", in_metrics), "hve");
  if (auto ref = opt_vector(require_key(m, "ref_point", in_metrics), "ref_point", 2)) {
    out.ref_point = std::array<double, 2>{(*ref)[0], (*ref)[1]};
  }
  out.cr = opt_number(require_key(m, "cr", in_metrics), "cr");
  const auto& pssa = require_key(m, "pssa", in_metrics);
  if (!pssa.is_null()) {
    if (!pssa.is_array()) schema_error("key 'pssa' must be an array");
    std::vector<PssaEntry> entries;
    std::size_t assigned = 0;
    for (const auto& e : pssa) {
      if (!e.is_object()) schema_error("pssa entries must be objects");
      PssaEntry p;
      const auto& rule = require_key(e, "rule", " in 'pssa' entry");
      if (!rule.is_string()) schema_error("pssa 'rule' must be a string");
      p.rule = rule.get<std::string>();
      p.n_eval = as_unsigned(require_key(e, "n_eval", " in 'pssa' entry"), "n_eval");
      p.mean_y = as_number(require_key(e, "mean_y", " in 'pssa' entry"), "mean_y");
      p.n_batch = as_unsigned(require_key(e, "n_batch", " in 'pssa' entry"), "n_batch");
      assigned += p.n_batch;
      entries.push_back(std::move(p));
    }
    if (assigned != k) {
      std::ostringstream os;
      os << "pssa batch counts sum to " << assigned << ", expected " << k;
      schema_error(os.str());
    }
    out.pssa = std::move(entries);
  }
  out.fiee_eta = opt_vector(require_key(m, "fiee_eta", in_metrics), "fiee_eta", d);
  out.fiee_lambda = opt_vector(require_key(m, "fiee_lambda", in_metrics), "fiee_lambda", d);
  out.fibb = opt_vector(require_key(m, "fibb", in_metrics), "fibb", d);
  out.fis_signed = opt_vector(require_key(m, "fis_signed", in_metrics), "fis_signed", d);
  out.fis_abs = opt_vector(require_key(m, "fis_abs", in_metrics), "fis_abs", d);

  if (const auto it = obj.find("metadata"); it != obj.end()) {
    if (!it->is_object()) schema_error("key 'metadata' must be an object");
    r.metadata = *it;
  }
  return r;
}

TraceReadError::TraceReadError(const std::filesystem::path& path, std::size_t line, const std::string& message,
                               std::vector<IterationTrace> partial)
    : Error(path.string() + ":" + std::to_string(line) + ": " + message), line_(line), partial_(std::move(partial)) {}

TraceWriter::TraceWriter(const std::filesystem::path& path, bool append)
    : path_(path), out_(path, append ? std::ios::app : std::ios::trunc) {
  if (!out_) throw Error("cannot open trace file for writing: " + path.string());
}

void TraceWriter::write(const IterationTrace& record) {
  out_ << to_json(record).dump() << '\n';
  out_.flush();
  if (!out_) throw Error("failed to write trace file: " + path_.string());
}

void write_trace(const std::filesystem::path& path, const std::vector<IterationTrace>& records) {
  TraceWriter writer(path);
  for (const auto& r : records) writer.write(r);
}

std::vector<IterationTrace> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path.string());
  std::vector<IterationTrace> records;
  std::string line;
  std::size_t number = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      IterationTrace r = parse_trace_line(line, dim);
      if (records.empty() && r.metadata.is_null()) throw Error("first line must carry a 'metadata' object");
      if (dim == 0) dim = r.dim();
      records.push_back(std::move(r));
    } catch (const Error& e) {
      throw TraceReadError(path, number, e.what(), std::move(records));
    }
  }
  return records;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t column, const std::filesystem::path& path) {
  const std::string t = trim(cell);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    std::ostringstream os;
    os << path.string() << ": non-numeric cell '" << t << "' at row " << row << ", column " << column;
    throw Error(os.str());
  }
  return value;
}

}  // namespace

ExternalLog ingest_csv(const std::filesystem::path& path, bool iteration_column_present) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty CSV file");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0] = header[0].substr(3);

  const std::size_t first = iteration_column_present ? 1 : 0;
  const bool shape_ok = header.size() >= first + 2 && header.back() == "y" &&
                        (!iteration_column_present || header[0] == "iter");
  bool names_ok = shape_ok;
  for (std::size_t j = first; names_ok && j + 1 < header.size(); ++j) {
    names_ok = header[j] == "x" + std::to_string(j - first + 1);
  }
  if (!names_ok) {
    throw Error(path.string() + ": header mismatch, expected " +
                std::string(iteration_column_present ? "iter," : "") + "x1..xd,y");
  }
  const std::size_t d = header.size() - first - 1;

  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<std::pair<std::vector<double>, double>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ": row " << row_number << " has " << cells.size() << " cells, expected " << header.size();
      throw Error(os.str());
    }
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = parse_cell(cells[first + j], row_number, first + j + 1, path);
    const double y = parse_cell(cells.back(), row_number, header.size(), path);
    if (iteration_column_present) {
      const double it = parse_cell(cells[0], row_number, 1, path);
      if (it != std::floor(it)) {
        std::ostringstream os;
        os << path.string() << ": iteration value at row " << row_number << " is not an integer";
        throw Error(os.str());
      }
      auto& g = groups[static_cast<std::int64_t>(it)];
      g.first.insert(g.first.end(), x.begin(), x.end());
      g.second.push_back(y);
    } else {
      rows.emplace_back(std::move(x), y);
    }
  }

  ExternalLog log;
  auto make_set = [d](const std::vector<double>& flat, const std::vector<double>& ys) {
    Matrix points(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * d + j];
    }
    return EvaluatedSet(std::move(points), Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size())));
  };
  if (iteration_column_present) {
    for (const auto& [it, g] : groups) log.iterations.push_back(make_set(g.first, g.second));
  } else {
    for (const auto& [x, y] : rows) log.iterations.push_back(make_set(x, {y}));
  }
  if (log.iterations.empty()) throw Error(path.string() + ": no data rows");
  return log;
}

ExternalLog ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV file: " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  return ingest_csv(path, !header.empty() && trim(header[0]) == "iter");
}

void export_csv(const std::filesystem::path& path, const std::vector<IterationTrace>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open CSV file for writing: " + path.string());
  const std::size_t d = records.empty() ? 0 : records.front().dim();
  out << "iter";
  for (std::size_t j = 0; j < d; ++j) out << ",x" << j + 1;
  out << ",y\n";
  for (const auto& r : records) {
    for (Eigen::Index i = 0; i < r.batch.rows(); ++i) {
      out << r.iter;
      for (Eigen::Index j = 0; j < r.batch.cols(); ++j) out << ',' << format_double(r.batch(i, j));
      out << ',' << format_double(r.batch_y[static_cast<std::size_t>(i)]) << '\n';
    }
  }
  if (!out) throw Error("failed to write CSV file: " + path.string());
}

RunReport aggregate_runs(const std::vector<std::vector<IterationTrace>>& runs) {
  if (runs.size() < 2) throw Error("aggregate_runs: at least 2 runs are required");
  for (const auto& run : runs) {
    if (run.empty()) throw Error("aggregate_runs: empty run trace");
  }
  const json& ref = runs.front().front().metadata;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const json& meta = runs[r].front().metadata;
    for (const char* key : {"problem", "dim", "strategy"}) {
      const json a = ref.is_object() && ref.contains(key) ? ref.at(key) : json(nullptr);
      const json b = meta.is_object() && meta.contains(key) ? meta.at(key) : json(nullptr);
      if (a != b) {
        throw Error(std::string("aggregate_runs: metadata mismatch on '") + key + "' between run 0 (" + a.dump() +
                    ") and run " + std::to_string(r) + " (" + b.dump() + ")");
      }
    }
  }

  RunReport report;
  std::size_t common = runs.front().size();
  for (const auto& run : runs) common = std::min(common, run.size());
  for (std::size_t t = 0; t < common; ++t) {
    double sum = 0.0, lo = runs.front()[t].best_y, hi = lo;
    for (const auto& run : runs) {
      sum += run[t].best_y;
      lo = std::min(lo, run[t].best_y);
      hi = std::max(hi, run[t].best_y);
    }
    report.iterations.push_back(runs.front()[t].iter);
    report.best_mean.push_back(sum / static_cast<double>(runs.size()));
    report.best_min.push_back(lo);
    report.best_max.push_back(hi);
  }
  double cr_sum = 0.0;
  std::size_t cr_count = 0;
  for (const auto& run : runs) {
    report.final_best.push_back(run.back().best_y);
    std::vector<double> best;
    for (const auto& rec : run) best.push_back(rec.best_y);
    try {
      const double v = cr(BestValueSequence(best));
      report.cr_per_run.emplace_back(v);
      cr_sum += v;
      ++cr_count;
    } catch (const Error&) {
      report.cr_per_run.emplace_back(std::nullopt);
    }
  }
  report.os = os(report.final_best);
  if (cr_count == runs.size()) report.cr_mean = cr_sum / static_cast<double>(cr_count);
  return report;
}

json to_json(const RunReport& r) {
  json cr_runs = json::array();
  for (const auto& v : r.cr_per_run) cr_runs.push_back(opt(v));
  return {{"runs", r.final_best.size()},   {"os", r.os},           {"final_best_y", r.final_best},
          {"cr_per_run", cr_runs},         {"cr_mean", opt(r.cr_mean)}, {"iter", r.iterations},
          {"best_y_mean", r.best_mean},    {"best_y_min", r.best_min}, {"best_y_max", r.best_max}};
}

}  // namespace iemso
