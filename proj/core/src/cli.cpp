#include "efold/cli.hpp"

#include "efold/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace efold {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void expect_object(const Json& node, const std::string& where) {
  if (!node.is_object()) config_error(where, "expected an object");
}

void reject_unknown_keys(const Json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
      return item.key() == k;
    });
    if (!known) config_error(where, "unknown key '" + item.key() + "'");
  }
}

std::string get_string(const Json& obj, const std::string& where, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) config_error(where, std::string("missing key '") + key + "'");
  if (!it->is_string()) config_error(where + "." + key, "expected a string");
  return it->get<std::string>();
}

std::string get_string_or(const Json& obj, const std::string& where, const char* key,
                          std::string fallback) {
  if (!obj.contains(key)) return fallback;
  return get_string(obj, where, key);
}

std::int64_t get_integer(const Json& obj, const std::string& where, const char* key,
                         std::int64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) config_error(where + "." + key, "expected an integer");
  return it->get<std::int64_t>();
}

double get_double(const Json& obj, const std::string& where, const char* key,
                  double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) config_error(where + "." + key, "expected a number");
  return it->get<double>();
}

bool get_bool(const Json& obj, const std::string& where, const char* key, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) config_error(where + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::uint64_t get_u64(const Json& obj, const std::string& where, const char* key,
                      std::optional<std::uint64_t> fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    config_error(where, std::string("missing key '") + key + "'");
  }
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(it->get<std::int64_t>());
  }
  config_error(where + "." + key, "expected a non-negative integer");
}

std::string resolve_path(const fs::path& config_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p.lexically_normal().string()
                         : (config_dir / p).lexically_normal().string();
}

std::vector<Transform> parse_transforms(const Json& node, const std::string& where) {
  if (!node.is_array()) config_error(where, "expected an array");
  std::vector<Transform> transforms;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string item_where = where + "[" + std::to_string(i) + "]";
    const Json& item = node[i];
    expect_object(item, item_where);
    const std::string op = get_string(item, item_where, "op");
    if (op == "drop_column") {
      reject_unknown_keys(item, item_where, {"op", "column"});
      transforms.push_back(Transform::drop_column(get_string(item, item_where, "column")));
    } else if (op == "encode_categorical") {
      reject_unknown_keys(item, item_where, {"op", "column"});
      transforms.push_back(
          Transform::encode_categorical(get_string(item, item_where, "column")));
    } else if (op == "encode_target") {
      reject_unknown_keys(item, item_where, {"op"});
      transforms.push_back(Transform::encode_target());
    } else {
      config_error(item_where + ".op", "unknown transform '" + op + "'");
    }
  }
  return transforms;
}

DatasetEntry parse_dataset_entry(const Json& node, const std::string& where,
                                 const fs::path& config_dir) {
  expect_object(node, where);
  const std::string name = get_string(node, where, "name");
  if (name.empty()) config_error(where + ".name", "must not be empty");

  if (node.contains("synthetic")) {
    reject_unknown_keys(node, where, {"name", "synthetic"});
    const Json& synth = node["synthetic"];
    const std::string synth_where = where + ".synthetic";
    expect_object(synth, synth_where);
    const std::string kind = get_string(synth, synth_where, "kind");
    SyntheticSpec spec;
    spec.name = name;
    if (kind == "gaussian_blobs") {
      reject_unknown_keys(synth, synth_where,
                          {"kind", "classes", "per_class", "dims", "spread", "seed"});
      GaussianBlobs blobs;
      blobs.classes = static_cast<int>(get_integer(synth, synth_where, "classes", blobs.classes));
      blobs.per_class =
          static_cast<int>(get_integer(synth, synth_where, "per_class", blobs.per_class));
      blobs.dims = static_cast<int>(get_integer(synth, synth_where, "dims", blobs.dims));
      blobs.spread = get_double(synth, synth_where, "spread", blobs.spread);
      blobs.seed = get_u64(synth, synth_where, "seed", blobs.seed);
      spec.kind = blobs;
    } else if (kind == "linear_trend") {
      reject_unknown_keys(synth, synth_where, {"kind", "n", "dims", "noise_std", "seed"});
      LinearTrend trend;
      trend.n = static_cast<int>(get_integer(synth, synth_where, "n", trend.n));
      trend.dims = static_cast<int>(get_integer(synth, synth_where, "dims", trend.dims));
      trend.noise_std = get_double(synth, synth_where, "noise_std", trend.noise_std);
      trend.seed = get_u64(synth, synth_where, "seed", trend.seed);
      spec.kind = trend;
    } else {
      config_error(synth_where + ".kind", "unknown synthetic kind '" + kind + "'");
    }
    return DatasetEntry{spec};
  }

  reject_unknown_keys(node, where, {"name", "path", "target_column", "task", "transforms"});
  DatasetManifest manifest;
  manifest.name = name;
  manifest.path = resolve_path(config_dir, get_string(node, where, "path"));
  manifest.target_column = get_string(node, where, "target_column");
  try {
    manifest.task = task_from_string(get_string(node, where, "task"));
  } catch (const std::invalid_argument& ex) {
    config_error(where + ".task", ex.what());
  }
  if (node.contains("transforms")) {
    manifest.transforms = parse_transforms(node["transforms"], where + ".transforms");
  }
  return DatasetEntry{manifest};
}

/// Generates or loads every dataset and checks each (dataset, learner) pair.
std::vector<Dataset> materialize_datasets(const ExperimentConfig& config) {
  std::vector<Dataset> datasets;
  datasets.reserve(config.datasets.size());
  for (const DatasetEntry& entry : config.datasets) {
    Dataset dataset = std::holds_alternative<DatasetManifest>(entry.source)
                          ? load_csv(std::get<DatasetManifest>(entry.source))
                          : generate(std::get<SyntheticSpec>(entry.source));
    const ValidationResult validation = validate_dataset(dataset, config.efold.e_max);
    if (!validation.ok()) {
      throw std::invalid_argument("dataset " + dataset.name +
                                  " unusable with e_max=" + std::to_string(config.efold.e_max) +
                                  ": " + validation.violations.front());
    }
    for (const LearnerKind learner : config.learners) {
      if (!compatible(learner, dataset.task)) {
        throw std::invalid_argument("learner " + std::string(to_string(learner)) +
                                    " is incompatible with dataset " + dataset.name +
                                    " (task " + std::string(to_string(dataset.task)) + ")");
      }
    }
    datasets.push_back(std::move(dataset));
  }
  return datasets;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() +
                             ": " + ec.message());
  }
}

std::string join_doubles(const std::vector<double>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined.push_back(';');
    joined += format_double(values[i]);
  }
  return joined;
}

[[noreturn]] void cell_error(const char* column, const std::string& value) {
  throw std::invalid_argument(std::string("column '") + column + "': bad value '" +
                              value + "'");
}

double parse_cell_double(const char* column, const std::string& value) {
  const std::optional<double> parsed = parse_double(value);
  if (!parsed) cell_error(column, value);
  return *parsed;
}

std::optional<double> parse_cell_opt_double(const char* column, const std::string& value) {
  if (value.empty()) return std::nullopt;
  return parse_cell_double(column, value);
}

int parse_cell_int(const char* column, const std::string& value) {
  const double parsed = parse_cell_double(column, value);
  const int as_int = static_cast<int>(parsed);
  if (static_cast<double>(as_int) != parsed) cell_error(column, value);
  return as_int;
}

bool parse_cell_bool(const char* column, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  cell_error(column, value);
}

std::vector<double> parse_cell_list(const char* column, const std::string& value) {
  std::vector<double> values;
  if (value.empty()) return values;
  std::size_t start = 0;
  while (true) {
    const std::size_t split = value.find(';', start);
    const std::string piece = value.substr(start, split - start);
    values.push_back(parse_cell_double(column, piece));
    if (split == std::string::npos) break;
    start = split + 1;
  }
  return values;
}

/// Histogram bins worth printing: everything from the earliest possible
/// stop upward, plus any out-of-band bin that actually has mass.
std::vector<int> histogram_bins(const AggregateReport& report) {
  std::vector<int> bins;
  for (int fold = 1; fold <= report.e_max; ++fold) {
    if (fold >= 4 || report.stop_fold_counts[static_cast<std::size_t>(fold)] > 0) {
      bins.push_back(fold);
    }
  }
  return bins;
}

OrderedJson summary_json(const AggregateReport& report, RunMode mode, long failed_runs) {
  OrderedJson doc;
  doc["schema"] = "efold-summary-v1";
  doc["mode"] = std::string(to_string(mode));
  doc["e_max"] = report.e_max;
  doc["total_runs"] = report.total_runs;
  doc["failed_runs"] = failed_runs;

  OrderedJson overall;
  overall["mean_stop_fold"] = report.overall_mean_stop_fold;
  overall["within_ci_fraction"] = report.overall_within_ci_fraction;
  overall["mean_saved_fraction"] = report.mean_saved_fraction;
  OrderedJson histogram;
  for (const int fold : histogram_bins(report)) {
    histogram[std::to_string(fold)] = report.stop_fold_counts[static_cast<std::size_t>(fold)];
  }
  overall["stop_fold_histogram"] = std::move(histogram);
  doc["overall"] = std::move(overall);

  OrderedJson by_task;
  if (report.mean_pct_diff_binary) by_task["binary"] = *report.mean_pct_diff_binary;
  if (report.mean_pct_diff_multiclass) {
    by_task["multiclass"] = *report.mean_pct_diff_multiclass;
  }
  if (report.mean_pct_diff_regression) {
    by_task["regression"] = *report.mean_pct_diff_regression;
  }
  doc["mean_pct_diff_by_task"] = std::move(by_task);

  OrderedJson combinations = OrderedJson::array();
  for (const CombinationStats& stats : report.combinations) {
    OrderedJson row;
    row["dataset"] = stats.dataset;
    row["learner"] = stats.learner;
    row["task"] = std::string(to_string(stats.task));
    row["runs"] = stats.runs;
    row["mean_stop_fold"] = stats.mean_stop_fold;
    row["within_ci_fraction"] = stats.within_ci_fraction;
    row["pct_diff_count"] = stats.pct_diff_count;
    if (stats.mean_pct_diff) row["mean_pct_diff"] = *stats.mean_pct_diff;
    if (stats.median_pct_diff) row["median_pct_diff"] = *stats.median_pct_diff;
    combinations.push_back(std::move(row));
  }
  doc["combinations"] = std::move(combinations);
  return doc;
}

std::string summary_text(const AggregateReport& report, RunMode mode, long failed_runs) {
  std::ostringstream out;
  out << "e-fold cross-validation summary (" << to_string(mode) << ")\n";
  out << "runs aggregated: " << report.total_runs << " (failed and excluded: "
      << failed_runs << ")\n";
  out << "e_max: " << report.e_max << "\n";
  out << "mean stop fold: " << format_double(report.overall_mean_stop_fold) << "\n";
  out << "within-CI fraction: " << format_double(report.overall_within_ci_fraction)
      << "\n";
  out << "mean saved-resource fraction: " << format_double(report.mean_saved_fraction)
      << "\n";
  out << "stop-fold histogram:\n";
  for (const int fold : histogram_bins(report)) {
    const long count = report.stop_fold_counts[static_cast<std::size_t>(fold)];
    out << "  " << fold << ": " << count << " ("
        << format_double(static_cast<double>(count) / static_cast<double>(report.total_runs))
        << ")\n";
  }
  out << "mean |pct diff| by task:\n";
  if (report.mean_pct_diff_binary) {
    out << "  binary: " << format_double(*report.mean_pct_diff_binary) << "%\n";
  }
  if (report.mean_pct_diff_multiclass) {
    out << "  multiclass: " << format_double(*report.mean_pct_diff_multiclass) << "%\n";
  }
  if (report.mean_pct_diff_regression) {
    out << "  regression: " << format_double(*report.mean_pct_diff_regression) << "%\n";
  }
  out << "combinations (dataset, learner, runs, mean stop, within-CI, pct-diff n/mean/median):\n";
  for (const CombinationStats& stats : report.combinations) {
    out << "  " << stats.dataset << ", " << stats.learner << ", " << stats.runs << ", "
        << format_double(stats.mean_stop_fold) << ", "
        << format_double(stats.within_ci_fraction) << ", " << stats.pct_diff_count;
    if (stats.mean_pct_diff) {
      out << "/" << format_double(*stats.mean_pct_diff) << "/"
          << format_double(*stats.median_pct_diff);
    }
    out << "\n";
  }
  return out.str();
}

std::string within_ci_tsv(const AggregateReport& report) {
  std::string out = "dataset\tlearner\twithin_ci_fraction\n";
  for (const CombinationStats& stats : report.combinations) {
    out += stats.dataset + "\t" + stats.learner + "\t" +
           format_double(stats.within_ci_fraction) + "\n";
  }
  return out;
}

std::string stop_fold_tsv(const AggregateReport& report) {
  std::string out = "stop_fold\tcount\tfraction\n";
  for (const int fold : histogram_bins(report)) {
    const long count = report.stop_fold_counts[static_cast<std::size_t>(fold)];
    out += std::to_string(fold) + "\t" + std::to_string(count) + "\t" +
           format_double(static_cast<double>(count) / static_cast<double>(report.total_runs)) +
           "\n";
  }
  return out;
}

std::string pct_diff_tsv(std::span<const RunRecord> records) {
  std::string out = "task\tpct_diff\n";
  for (const RunRecord& record : records) {
    if (record.pct_diff) {
      out += std::string(to_string(record.task)) + "\t" + format_double(*record.pct_diff) +
             "\n";
    }
  }
  return out;
}

fs::path output_directory(std::string configured) {
  if (const char* env = std::getenv("EFOLD_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path(std::move(configured));
}

/// Writes the aggregate artifacts; records are the successful runs the
/// report was computed from (the pct-diff plot needs per-run values).
void write_summary_files(const fs::path& dir, const AggregateReport& report,
                         RunMode mode, long failed_runs,
                         std::span<const RunRecord> successes) {
  write_file_atomic(dir / "summary.json", summary_json(report, mode, failed_runs).dump(2) + "\n");
  write_file_atomic(dir / "summary.txt", summary_text(report, mode, failed_runs));
  write_file_atomic(dir / "within_ci_distribution.tsv", within_ci_tsv(report));
  write_file_atomic(dir / "stop_fold_histogram.tsv", stop_fold_tsv(report));
  write_file_atomic(dir / "pct_diff_by_task.tsv", pct_diff_tsv(successes));
}

void print_failures(std::span<const RunRecord> records, std::ostream& err) {
  constexpr int kMaxShown = 20;
  int shown = 0;
  long total = 0;
  for (const RunRecord& record : records) {
    if (!record.failed) continue;
    ++total;
    if (shown < kMaxShown) {
      err << "failed run: dataset=" << record.dataset << " learner=" << record.learner
          << " seed=" << record.seed << " fold=" << record.failed_fold.value_or(0)
          << ": " << record.failure_message << "\n";
      ++shown;
    }
  }
  if (total > shown) {
    err << "... and " << (total - shown) << " more failed runs\n";
  }
}

}  // namespace

const std::string& DatasetEntry::name() const {
  return std::visit([](const auto& source) -> const std::string& { return source.name; },
                    source);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream input(path, std::ios::binary);
  if (!input) throw std::runtime_error("cannot open config " + path);

  Json doc;
  try {
    doc = Json::parse(input);
  } catch (const Json::parse_error& ex) {
    throw std::invalid_argument("config: " + std::string(ex.what()));
  }
  expect_object(doc, "config");
  reject_unknown_keys(doc, "config",
                      {"datasets", "learners", "runs_per_combination", "efold",
                       "base_seed", "mode", "workers", "output_dir",
                       "ci_uses_standard_error"});

  const fs::path config_dir = fs::path(path).parent_path();
  ExperimentConfig config;

  if (!doc.contains("datasets") || !doc["datasets"].is_array() || doc["datasets"].empty()) {
    config_error("datasets", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < doc["datasets"].size(); ++i) {
    config.datasets.push_back(parse_dataset_entry(
        doc["datasets"][i], "datasets[" + std::to_string(i) + "]", config_dir));
  }
  for (std::size_t i = 0; i < config.datasets.size(); ++i) {
    for (std::size_t j = i + 1; j < config.datasets.size(); ++j) {
      if (config.datasets[i].name() == config.datasets[j].name()) {
        config_error("datasets", "duplicate dataset name '" + config.datasets[i].name() + "'");
      }
    }
  }

  if (!doc.contains("learners") || !doc["learners"].is_array() || doc["learners"].empty()) {
    config_error("learners", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < doc["learners"].size(); ++i) {
    const Json& item = doc["learners"][i];
    const std::string where = "learners[" + std::to_string(i) + "]";
    if (!item.is_string()) config_error(where, "expected a string");
    try {
      config.learners.push_back(learner_from_string(item.get<std::string>()));
    } catch (const std::invalid_argument& ex) {
      config_error(where, ex.what());
    }
  }
  for (std::size_t i = 0; i < config.learners.size(); ++i) {
    for (std::size_t j = i + 1; j < config.learners.size(); ++j) {
      if (config.learners[i] == config.learners[j]) {
        config_error("learners", "duplicate learner '" +
                                     std::string(to_string(config.learners[i])) + "'");
      }
    }
  }

  config.runs_per_combination =
      static_cast<int>(get_integer(doc, "config", "runs_per_combination", 100));
  if (config.runs_per_combination < 1) {
    config_error("runs_per_combination", "must be >= 1");
  }

  if (doc.contains("efold")) {
    const Json& efold = doc["efold"];
    expect_object(efold, "efold");
    reject_unknown_keys(efold, "efold", {"e_max", "count_threshold", "stability_tolerance"});
    config.efold.e_max = static_cast<int>(get_integer(efold, "efold", "e_max", kDefaultEmax));
    config.efold.count_threshold = static_cast<int>(
        get_integer(efold, "efold", "count_threshold", kDefaultCountThreshold));
    config.efold.stability_tolerance =
        get_double(efold, "efold", "stability_tolerance", kDefaultStabilityTolerance);
  }
  try {
    validate_config(config.efold);
  } catch (const std::invalid_argument& ex) {
    config_error("efold", ex.what());
  }

  config.base_seed = get_u64(doc, "config", "base_seed", std::nullopt);
  try {
    config.mode = run_mode_from_string(get_string_or(doc, "config", "mode", "simulate"));
  } catch (const std::invalid_argument& ex) {
    config_error("mode", ex.what());
  }
  config.workers = static_cast<int>(get_integer(doc, "config", "workers", 1));
  if (config.workers < 1) config_error("workers", "must be >= 1");
  config.output_dir = resolve_path(config_dir, get_string(doc, "config", "output_dir"));
  config.ci_uses_standard_error = get_bool(doc, "config", "ci_uses_standard_error", true);
  return config;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t combination,
                          std::size_t run) {
  constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  const std::uint64_t combo =
      splitmix64(base_seed + kGamma * (static_cast<std::uint64_t>(combination) + 1));
  return splitmix64(combo + kGamma * (static_cast<std::uint64_t>(run) + 1));
}

std::string records_header() {
  return "dataset,learner,task,metric,mode,seed,stop_fold,saved_folds,m_e,m_full,"
         "ci_low,ci_high,within_ci,pct_diff,failed,failed_fold,failure_message,"
         "fold_scores,fold_seconds";
}

std::string record_to_csv_row(const RunRecord& record) {
  std::string row;
  row += csv_quote(record.dataset);
  row += ',';
  row += csv_quote(record.learner);
  row += ',';
  row += to_string(record.task);
  row += ',';
  row += to_string(record.metric);
  row += ',';
  row += to_string(record.mode);
  row += ',';
  row += std::to_string(record.seed);
  row += ',';
  row += std::to_string(record.stop_fold);
  row += ',';
  row += std::to_string(record.saved_folds);
  row += ',';
  row += format_double(record.m_e);
  row += ',';
  if (record.m_full) row += format_double(*record.m_full);
  row += ',';
  if (record.ci_low) row += format_double(*record.ci_low);
  row += ',';
  if (record.ci_high) row += format_double(*record.ci_high);
  row += ',';
  if (record.within_ci) row += *record.within_ci ? "true" : "false";
  row += ',';
  if (record.pct_diff) row += format_double(*record.pct_diff);
  row += ',';
  row += record.failed ? "true" : "false";
  row += ',';
  if (record.failed_fold) row += std::to_string(*record.failed_fold);
  row += ',';
  row += csv_quote(record.failure_message);
  row += ',';
  row += join_doubles(record.fold_scores);
  row += ',';
  row += join_doubles(record.per_fold_wall_time);
  return row;
}

RunRecord record_from_csv_row(const std::vector<std::string>& cells) {
  if (cells.size() != 19) {
    throw std::invalid_argument("expected 19 cells, got " + std::to_string(cells.size()));
  }
  RunRecord record;
  record.dataset = cells[0];
  record.learner = cells[1];
  record.task = task_from_string(cells[2]);
  record.metric = metric_for(record.task);
  if (cells[3] != to_string(record.metric)) {
    throw std::invalid_argument("column 'metric': '" + cells[3] + "' does not match task '" +
                                cells[2] + "'");
  }
  record.mode = run_mode_from_string(cells[4]);
  {
    std::uint64_t value = 0;
    const char* begin = cells[5].data();
    const char* end = begin + cells[5].size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || begin == end) cell_error("seed", cells[5]);
    record.seed = value;
  }
  record.stop_fold = parse_cell_int("stop_fold", cells[6]);
  record.saved_folds = parse_cell_int("saved_folds", cells[7]);
  record.m_e = parse_cell_double("m_e", cells[8]);
  record.m_full = parse_cell_opt_double("m_full", cells[9]);
  record.ci_low = parse_cell_opt_double("ci_low", cells[10]);
  record.ci_high = parse_cell_opt_double("ci_high", cells[11]);
  if (!cells[12].empty()) record.within_ci = parse_cell_bool("within_ci", cells[12]);
  record.pct_diff = parse_cell_opt_double("pct_diff", cells[13]);
  record.failed = parse_cell_bool("failed", cells[14]);
  if (!cells[15].empty()) record.failed_fold = parse_cell_int("failed_fold", cells[15]);
  record.failure_message = cells[16];
  record.fold_scores = parse_cell_list("fold_scores", cells[17]);
  record.per_fold_wall_time = parse_cell_list("fold_seconds", cells[18]);
  if (record.fold_scores.size() != record.per_fold_wall_time.size()) {
    throw std::invalid_argument("fold_scores and fold_seconds lengths differ");
  }
  return record;
}

void write_records_file(const std::string& path, std::span<const RunRecord> records) {
  std::string content;
  content += kRecordsVersion;
  content += '\n';
  content += records_header();
  content += '\n';
  for (const RunRecord& record : records) {
    content += record_to_csv_row(record);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::vector<RunRecord> read_records_file(const std::string& path) {
  std::ifstream input(path, std::ios::binary);
  if (!input) throw std::runtime_error("cannot open records file " + path);
  std::ostringstream buffer;
  buffer << input.rdbuf();
  std::string text = buffer.str();

  const std::size_t newline = text.find('\n');
  std::string version = text.substr(0, newline == std::string::npos ? text.size() : newline);
  if (!version.empty() && version.back() == '\r') version.pop_back();
  if (version != kRecordsVersion) {
    throw std::invalid_argument(path + ":1: expected version line '" +
                                std::string(kRecordsVersion) + "', got '" + version + "'");
  }
  text.erase(0, newline == std::string::npos ? text.size() : newline + 1);

  std::vector<std::size_t> record_lines;
  const auto rows = parse_csv_text(text, path, &record_lines);
  if (rows.empty()) throw std::invalid_argument(path + ": missing records header");

  const std::string joined_header = records_header();
  std::string found_header;
  for (std::size_t i = 0; i < rows.front().size(); ++i) {
    if (i) found_header.push_back(',');
    found_header += rows.front()[i];
  }
  if (found_header != joined_header) {
    throw std::invalid_argument(path + ":2: unexpected records header");
  }

  std::vector<RunRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    try {
      records.push_back(record_from_csv_row(rows[i]));
    } catch (const std::invalid_argument& ex) {
      // +1: the version line was stripped before parsing.
      throw std::invalid_argument(path + ":" + std::to_string(record_lines[i] + 1) +
                                  ": " + ex.what());
    }
  }
  if (records.empty()) throw std::invalid_argument(path + ": no records");
  return records;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  std::vector<Dataset> datasets;
  try {
    config = load_experiment_config(options.config_path);
    if (options.mode_override) config.mode = *options.mode_override;
    if (options.workers_override) {
      if (*options.workers_override < 1) {
        throw std::invalid_argument("config: workers: must be >= 1");
      }
      config.workers = *options.workers_override;
    }
    datasets = materialize_datasets(config);
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitConfigError;
  }

  std::vector<RunPlan> plans;
  const std::size_t runs = static_cast<std::size_t>(config.runs_per_combination);
  plans.reserve(datasets.size() * config.learners.size() * runs);
  std::size_t combination = 0;
  for (const Dataset& dataset : datasets) {
    for (const LearnerKind learner : config.learners) {
      for (std::size_t run = 0; run < runs; ++run) {
        plans.push_back(RunPlan{&dataset, LearnerSpec{learner, {}},
                                derive_seed(config.base_seed, combination, run)});
      }
      ++combination;
    }
  }

  std::vector<RunRecord> records;
  try {
    records = run_all(plans, config.efold, config.mode, config.workers,
                      config.ci_uses_standard_error);
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitConfigError;
  }

  const fs::path dir = output_directory(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "cannot create output directory " << dir.string() << ": " << ec.message()
        << "\n";
    return kExitIoError;
  }

  long failed = 0;
  std::vector<RunRecord> successes;
  successes.reserve(records.size());
  for (const RunRecord& record : records) {
    if (record.failed) {
      ++failed;
    } else {
      successes.push_back(record);
    }
  }

  try {
    write_records_file((dir / "records.csv").string(), records);
    if (config.mode == RunMode::Simulate && !successes.empty()) {
      const AggregateReport report = aggregate(successes);
      write_summary_files(dir, report, config.mode, failed, successes);
      out << "runs: " << report.total_runs << " aggregated, " << failed << " failed\n";
      out << "mean stop fold " << format_double(report.overall_mean_stop_fold)
          << ", within-CI fraction " << format_double(report.overall_within_ci_fraction)
          << ", mean saved fraction " << format_double(report.mean_saved_fraction) << "\n";
    } else {
      out << "runs: " << records.size() << " recorded, " << failed << " failed\n";
      if (config.mode == RunMode::EarlyStop) {
        out << "early-stop mode: records only, no ground-truth summary\n";
      }
    }
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitIoError;
  }
  out << "output: " << dir.string() << "\n";

  if (failed > 0) {
    print_failures(records, err);
    if (!options.allow_failures) return kExitRunFailure;
    if (successes.empty()) return kExitRunFailure;
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_experiment_config(config_path);
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitConfigError;
  }

  std::vector<std::string> problems;
  for (const DatasetEntry& entry : config.datasets) {
    Dataset dataset;
    try {
      dataset = std::holds_alternative<DatasetManifest>(entry.source)
                    ? load_csv(std::get<DatasetManifest>(entry.source))
                    : generate(std::get<SyntheticSpec>(entry.source));
    } catch (const std::exception& ex) {
      problems.emplace_back(ex.what());
      continue;
    }
    const ValidationResult validation = validate_dataset(dataset, config.efold.e_max);
    for (const std::string& violation : validation.violations) {
      problems.push_back("dataset " + dataset.name + ": " + violation);
    }
    for (const LearnerKind learner : config.learners) {
      if (!compatible(learner, dataset.task)) {
        problems.push_back("learner " + std::string(to_string(learner)) +
                           " is incompatible with dataset " + dataset.name + " (task " +
                           std::string(to_string(dataset.task)) + ")");
      }
    }
  }

  if (problems.empty()) {
    out << "ok\n";
    return kExitOk;
  }
  for (const std::string& problem : problems) {
    out << problem << "\n";
  }
  return kExitConfigError;
}

int cmd_report(const std::vector<std::string>& records_paths, std::string output_dir,
               std::ostream& out, std::ostream& err) {
  if (records_paths.empty()) {
    err << "report: no records files given\n";
    return kExitConfigError;
  }

  std::vector<RunRecord> records;
  try {
    for (const std::string& path : records_paths) {
      std::vector<RunRecord> part = read_records_file(path);
      records.insert(records.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
  } catch (const std::runtime_error& ex) {
    err << ex.what() << "\n";
    return kExitIoError;
  } catch (const std::invalid_argument& ex) {
    err << ex.what() << "\n";
    return kExitConfigError;
  }

  long failed = 0;
  std::vector<RunRecord> successes;
  successes.reserve(records.size());
  for (RunRecord& record : records) {
    if (record.failed) {
      ++failed;
    } else {
      successes.push_back(std::move(record));
    }
  }

  if (output_dir.empty()) {
    output_dir = fs::path(records_paths.front()).parent_path().string();
    if (output_dir.empty()) output_dir = ".";
  }
  const fs::path dir = output_directory(std::move(output_dir));

  try {
    const AggregateReport report = aggregate(successes);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      err << "cannot create output directory " << dir.string() << ": " << ec.message()
          << "\n";
      return kExitIoError;
    }
    write_summary_files(dir, report, successes.front().mode, failed, successes);
    out << "runs: " << report.total_runs << " aggregated, " << failed << " failed\n";
    out << "mean stop fold " << format_double(report.overall_mean_stop_fold)
        << ", within-CI fraction " << format_double(report.overall_within_ci_fraction)
        << ", mean saved fraction " << format_double(report.mean_saved_fraction) << "\n";
    out << "output: " << dir.string() << "\n";
  } catch (const std::invalid_argument& ex) {
    err << ex.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& ex) {
    err << ex.what() << "\n";
    return kExitIoError;
  }
  return kExitOk;
}

}  // namespace efold
