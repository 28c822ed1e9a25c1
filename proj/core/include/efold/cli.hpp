#pragma once

#include "efold/core.hpp"
#include "efold/harness.hpp"
#include "efold/ingestion.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace efold {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRunFailure = 2;
inline constexpr int kExitIoError = 3;

/// One dataset slot of an experiment: either a CSV manifest or a synthetic
/// generator spec.
struct DatasetEntry {
  std::variant<DatasetManifest, SyntheticSpec> source;

  const std::string& name() const;
};

/// A full experiment: the cross product of datasets and learners, each
/// combination run `runs_per_combination` times with derived seeds.
struct ExperimentConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<LearnerKind> learners;
  int runs_per_combination = 100;
  EfoldConfig efold;
  std::uint64_t base_seed = 0;
  RunMode mode = RunMode::Simulate;
  int workers = 1;
  std::string output_dir;
  bool ci_uses_standard_error = true;
};

/// Parses and structurally validates a JSON experiment config. Relative
/// dataset paths and output_dir resolve against the config file's
/// directory. Unknown keys are rejected. Throws std::runtime_error when the
/// file cannot be read and std::invalid_argument naming the offending field
/// otherwise. Dataset files are not touched here; materialization is a
/// separate step so cmd_validate can report every problem at once.
ExperimentConfig load_experiment_config(const std::string& path);

/// Per-run fold seed. c is the 0-based combination index (dataset-major,
/// learner-minor, both in config order), r the 0-based run index:
///   seed(c, r) = splitmix64(splitmix64(base_seed + G*(c+1)) + G*(r+1))
/// with G = 0x9E3779B97F4A7C15. This chain is part of the records contract
/// and stays stable across versions.
std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t combination,
                          std::size_t run);

/// Version tag on the first line of every records file.
inline constexpr std::string_view kRecordsVersion = "# efold-records-v1";

/// The fixed records CSV header. Optional fields serialize as empty cells;
/// fold_scores and fold_seconds are semicolon-joined. fold_seconds is wall
/// time and is excluded from determinism comparisons.
std::string records_header();

std::string record_to_csv_row(const RunRecord& record);
RunRecord record_from_csv_row(const std::vector<std::string>& cells);

/// Writes records atomically (temp file, then rename). Throws
/// std::runtime_error on I/O failure.
void write_records_file(const std::string& path, std::span<const RunRecord> records);

/// Reads a records file back. Throws std::runtime_error when the file
/// cannot be read and std::invalid_argument (naming the line) for a version
/// mismatch, header mismatch, or malformed row.
std::vector<RunRecord> read_records_file(const std::string& path);

struct RunOptions {
  std::string config_path;
  std::optional<RunMode> mode_override;
  std::optional<int> workers_override;
  bool allow_failures = false;
};

/// Executes the experiment and writes records.csv plus, in Simulate mode,
/// summary.json, summary.txt and the three plot data files
/// (within_ci_distribution.tsv, stop_fold_histogram.tsv,
/// pct_diff_by_task.tsv) to the output directory. The EFOLD_OUTPUT_DIR
/// environment variable overrides the configured output_dir. Returns an
/// exit code: 1 on config problems, 2 when any run failed (unless
/// allow_failures), 3 on I/O errors.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Checks the config and all referenced datasets without running anything;
/// prints "ok" or every problem found. Returns 0 or kExitConfigError.
int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Recomputes the aggregate summary and plot files from stored records;
/// several records files merge into one report. output_dir empty means the
/// directory of the first records file; EFOLD_OUTPUT_DIR overrides both.
int cmd_report(const std::vector<std::string>& records_paths, std::string output_dir,
               std::ostream& out, std::ostream& err);

}  // namespace efold
