#pragma once

#include "efold/core.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace efold {

/// Column-level preprocessing step. Transforms run strictly in listed
/// order; referencing a column that does not exist at that point (for
/// example encoding one that an earlier step dropped) is an error.
/// EncodeTarget requests first-appearance encoding of the target column and
/// is implied for every classification dataset, so listing it is optional
/// there and an error for regression.
struct Transform {
  enum class Kind { DropColumn, EncodeCategorical, EncodeTarget };

  Kind kind = Kind::DropColumn;
  std::string column;  // unused for EncodeTarget

  static Transform drop_column(std::string name);
  static Transform encode_categorical(std::string name);
  static Transform encode_target();
};

/// Declarative description of one CSV-backed dataset.
struct DatasetManifest {
  std::string name;
  std::string path;
  std::string target_column;
  TaskKind task = TaskKind::Regression;
  std::vector<Transform> transforms;
};

/// Parses RFC-4180 CSV text into records of string fields: ',' separates
/// fields, LF or CRLF separates records, '"' quotes fields with '""' as the
/// escape. Malformed quoting throws std::invalid_argument prefixed with
/// `origin`. When `record_lines` is given it receives the 1-based starting
/// line of each record.
std::vector<std::vector<std::string>> parse_csv_text(
    const std::string& text, const std::string& origin,
    std::vector<std::size_t>* record_lines = nullptr);

/// The field, quoted if it contains a comma, quote, or line break.
std::string csv_quote(const std::string& field);

/// Loads an RFC-4180-style CSV (UTF-8, header row required, '.' decimal
/// separator) through the manifest: transforms in order, then numeric
/// conversion, then dataset validation. Classification targets are always
/// mapped to {0..C-1} in first-appearance order, as are EncodeCategorical
/// feature columns. Throws std::runtime_error when the file cannot be read
/// and std::invalid_argument for everything structural: a missing column, an
/// unparseable numeric cell, or a non-finite value (the cell errors name the
/// 1-based data row and the column), and any validate_dataset violation.
Dataset load_csv(const DatasetManifest& manifest);

/// Writes the dataset as CSV: feature columns under their names plus a
/// final "target" column. Values are serialized in shortest round-trip
/// form, so load_csv on the result reproduces the dataset exactly. Throws
/// std::runtime_error on I/O failure.
void write_csv(const Dataset& dataset, const std::string& path);

/// Isotropic Gaussian clusters, one per class, exactly per_class rows each.
/// Draw order from Rng(seed): class means (class-major, dimension-minor,
/// uniform in [-10, 10)), then rows in class-block order with each feature
/// mean + spread * normal().
struct GaussianBlobs {
  int classes = 2;
  int per_class = 50;
  int dims = 2;
  double spread = 1.0;
  std::uint64_t seed = 0;
};

/// Linear ground truth y = w . x + b + noise_std * normal(). Draw order
/// from Rng(seed): w (uniform in [-5, 5) per dimension), b, then rows
/// (features uniform in [-5, 5), then the noise draw). w and b are recorded
/// in dataset metadata as "weights" (semicolon-joined) and "intercept".
struct LinearTrend {
  int n = 100;
  int dims = 2;
  double noise_std = 1.0;
  std::uint64_t seed = 0;
};

/// Seed-deterministic synthetic dataset: byte-identical output for equal
/// specs.
struct SyntheticSpec {
  std::string name;
  std::variant<GaussianBlobs, LinearTrend> kind;
};

/// Materializes a synthetic dataset. GaussianBlobs yields Binary for 2
/// classes and Multiclass otherwise; LinearTrend yields Regression. Throws
/// std::invalid_argument on non-positive counts or non-finite parameters.
Dataset generate(const SyntheticSpec& spec);

}  // namespace efold
