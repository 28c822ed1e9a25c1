#include "efold/ingestion.hpp"

#include "efold/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace efold {

std::vector<std::vector<std::string>> parse_csv_text(const std::string& text,
                                                     const std::string& origin,
                                                     std::vector<std::size_t>* record_lines) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_start = 1;

  auto malformed = [&](const std::string& what) {
    throw std::invalid_argument(origin + ": " + what + " at line " +
                                std::to_string(line));
  };
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    if (record_lines) record_lines->push_back(record_start);
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) malformed("stray quote");
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 >= text.size() || text[i + 1] != '\n') malformed("bare carriage return");
        break;
      case '\n':
        end_record();
        ++line;
        record_start = line;
        break;
      default:
        if (field_was_quoted) malformed("content after closing quote");
        field.push_back(c);
    }
  }
  if (in_quotes) malformed("unterminated quote");
  if (!field.empty() || field_was_quoted || !record.empty()) end_record();
  return records;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

namespace {

/// First-appearance ordinal encoding of a string column.
std::pair<std::vector<double>, int> encode_ordinal(const std::vector<std::string>& cells) {
  std::map<std::string, int> codes;
  std::vector<double> encoded(cells.size());
  int next = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto [it, inserted] = codes.try_emplace(cells[i], next);
    if (inserted) ++next;
    encoded[i] = static_cast<double>(it->second);
  }
  return {std::move(encoded), next};
}

}  // namespace

Transform Transform::drop_column(std::string name) {
  return {Kind::DropColumn, std::move(name)};
}

Transform Transform::encode_categorical(std::string name) {
  return {Kind::EncodeCategorical, std::move(name)};
}

Transform Transform::encode_target() { return {Kind::EncodeTarget, {}}; }

Dataset load_csv(const DatasetManifest& manifest) {
  if (manifest.name.empty()) throw std::invalid_argument("dataset manifest needs a name");
  if (manifest.target_column.empty()) {
    throw std::invalid_argument("dataset " + manifest.name + ": target_column is empty");
  }

  std::ifstream input(manifest.path, std::ios::binary);
  if (!input) {
    throw std::runtime_error("dataset " + manifest.name + ": cannot open " + manifest.path);
  }
  std::ostringstream buffer;
  buffer << input.rdbuf();
  const auto records = parse_csv_text(buffer.str(), "dataset " + manifest.name);

  if (records.empty()) {
    throw std::invalid_argument("dataset " + manifest.name + ": missing header row");
  }
  if (records.size() < 2) {
    throw std::invalid_argument("dataset " + manifest.name + ": no data rows");
  }
  const std::vector<std::string>& header = records.front();
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != header.size()) {
      throw std::invalid_argument("dataset " + manifest.name + ": row " +
                                  std::to_string(i) + " has " +
                                  std::to_string(records[i].size()) + " cells, header has " +
                                  std::to_string(header.size()));
    }
  }

  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column_of.try_emplace(header[i], i).second) {
      throw std::invalid_argument("dataset " + manifest.name + ": duplicate column '" +
                                  header[i] + "'");
    }
  }

  std::vector<bool> active(header.size(), true);
  std::vector<bool> encode(header.size(), false);
  auto find_active = [&](const std::string& name, const char* op) {
    const auto it = column_of.find(name);
    if (it == column_of.end() || !active[it->second]) {
      throw std::invalid_argument("dataset " + manifest.name + ": column '" + name +
                                  "' not found (" + op + ")");
    }
    return it->second;
  };

  for (const Transform& transform : manifest.transforms) {
    switch (transform.kind) {
      case Transform::Kind::DropColumn: {
        const std::size_t idx = find_active(transform.column, "drop_column");
        if (transform.column == manifest.target_column) {
          throw std::invalid_argument("dataset " + manifest.name +
                                      ": cannot drop the target column");
        }
        active[idx] = false;
        encode[idx] = false;
        break;
      }
      case Transform::Kind::EncodeCategorical: {
        const std::size_t idx = find_active(transform.column, "encode_categorical");
        if (transform.column == manifest.target_column) {
          throw std::invalid_argument("dataset " + manifest.name +
                                      ": encode_categorical may not reference the target "
                                      "column, use encode_target");
        }
        encode[idx] = true;
        break;
      }
      case Transform::Kind::EncodeTarget:
        if (manifest.task == TaskKind::Regression) {
          throw std::invalid_argument("dataset " + manifest.name +
                                      ": encode_target is only valid for classification");
        }
        break;
    }
  }

  const auto target_it = column_of.find(manifest.target_column);
  if (target_it == column_of.end() || !active[target_it->second]) {
    throw std::invalid_argument("dataset " + manifest.name + ": target column '" +
                                manifest.target_column + "' not found");
  }
  const std::size_t target_idx = target_it->second;

  std::vector<std::size_t> feature_columns;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (active[i] && i != target_idx) feature_columns.push_back(i);
  }
  const std::size_t n = records.size() - 1;

  Dataset dataset;
  dataset.name = manifest.name;
  dataset.task = manifest.task;
  dataset.features.resize(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(feature_columns.size()));
  dataset.target.resize(static_cast<Eigen::Index>(n));
  for (const std::size_t c : feature_columns) {
    dataset.feature_names.push_back(header[c]);
  }

  // Rows are 1-based data rows in error messages (the header is row 0).
  auto cell_error = [&](const char* what, const std::string& cell, std::size_t row,
                        const std::string& column) {
    std::ostringstream os;
    os << "dataset " << manifest.name << ": " << what << " '" << cell << "' at row "
       << row << ", column '" << column << "'";
    return std::invalid_argument(os.str());
  };

  std::vector<std::string> cells(n);
  for (std::size_t j = 0; j < feature_columns.size(); ++j) {
    const std::size_t c = feature_columns[j];
    if (encode[c]) {
      for (std::size_t r = 0; r < n; ++r) cells[r] = records[r + 1][c];
      const auto [values, distinct] = encode_ordinal(cells);
      (void)distinct;
      for (std::size_t r = 0; r < n; ++r) {
        dataset.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
            values[r];
      }
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = records[r + 1][c];
      const std::optional<double> value = parse_double(cell);
      if (!value) throw cell_error("unparseable numeric cell", cell, r + 1, header[c]);
      if (!std::isfinite(*value)) {
        throw cell_error("non-finite value", cell, r + 1, header[c]);
      }
      dataset.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *value;
    }
  }

  if (manifest.task == TaskKind::Regression) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = records[r + 1][target_idx];
      const std::optional<double> value = parse_double(cell);
      if (!value) {
        throw cell_error("unparseable numeric cell", cell, r + 1, header[target_idx]);
      }
      if (!std::isfinite(*value)) {
        throw cell_error("non-finite value", cell, r + 1, header[target_idx]);
      }
      dataset.target[static_cast<Eigen::Index>(r)] = *value;
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) cells[r] = records[r + 1][target_idx];
    const auto [values, distinct] = encode_ordinal(cells);
    for (std::size_t r = 0; r < n; ++r) {
      dataset.target[static_cast<Eigen::Index>(r)] = values[r];
    }
    dataset.class_count = distinct;
  }

  const ValidationResult validation = validate_dataset(dataset);
  if (!validation.ok()) {
    std::string message = "dataset " + manifest.name + " failed validation:";
    for (const std::string& violation : validation.violations) {
      message += " " + violation + ";";
    }
    message.pop_back();
    throw std::invalid_argument(message);
  }
  return dataset;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream output(path, std::ios::binary | std::ios::trunc);
  if (!output) {
    throw std::runtime_error("dataset " + dataset.name + ": cannot write " + path);
  }
  for (const std::string& name : dataset.feature_names) {
    output << csv_quote(name) << ',';
  }
  output << "target\n";
  for (Eigen::Index r = 0; r < dataset.rows(); ++r) {
    for (Eigen::Index c = 0; c < dataset.cols(); ++c) {
      output << format_double(dataset.features(r, c)) << ',';
    }
    output << format_double(dataset.target[r]) << '\n';
  }
  if (!output.flush()) {
    throw std::runtime_error("dataset " + dataset.name + ": write failed for " + path);
  }
}

Dataset generate(const SyntheticSpec& spec) {
  if (spec.name.empty()) throw std::invalid_argument("synthetic spec needs a name");

  Dataset dataset;
  dataset.name = spec.name;

  if (const auto* blobs = std::get_if<GaussianBlobs>(&spec.kind)) {
    if (blobs->classes < 2) throw std::invalid_argument("blobs need at least 2 classes");
    if (blobs->per_class < 1 || blobs->dims < 1) {
      throw std::invalid_argument("blobs counts must be positive");
    }
    if (!std::isfinite(blobs->spread) || blobs->spread < 0.0) {
      throw std::invalid_argument("blobs spread must be finite and non-negative");
    }
    Rng rng(blobs->seed);
    Matrix means(blobs->classes, blobs->dims);
    for (int c = 0; c < blobs->classes; ++c) {
      for (int d = 0; d < blobs->dims; ++d) {
        means(c, d) = rng.uniform(-10.0, 10.0);
      }
    }
    const Eigen::Index n =
        static_cast<Eigen::Index>(blobs->classes) * blobs->per_class;
    dataset.features.resize(n, blobs->dims);
    dataset.target.resize(n);
    Eigen::Index row = 0;
    for (int c = 0; c < blobs->classes; ++c) {
      for (int i = 0; i < blobs->per_class; ++i, ++row) {
        for (int d = 0; d < blobs->dims; ++d) {
          dataset.features(row, d) = means(c, d) + blobs->spread * rng.normal();
        }
        dataset.target[row] = static_cast<double>(c);
      }
    }
    dataset.task = blobs->classes == 2 ? TaskKind::Binary : TaskKind::Multiclass;
    dataset.class_count = blobs->classes;
    for (int d = 0; d < blobs->dims; ++d) {
      dataset.feature_names.push_back("x" + std::to_string(d));
    }
    return dataset;
  }

  const auto& trend = std::get<LinearTrend>(spec.kind);
  if (trend.n < 1 || trend.dims < 1) {
    throw std::invalid_argument("linear trend counts must be positive");
  }
  if (!std::isfinite(trend.noise_std) || trend.noise_std < 0.0) {
    throw std::invalid_argument("linear trend noise_std must be finite and non-negative");
  }
  Rng rng(trend.seed);
  Vector weights(trend.dims);
  for (int d = 0; d < trend.dims; ++d) {
    weights[d] = rng.uniform(-5.0, 5.0);
  }
  const double intercept = rng.uniform(-5.0, 5.0);

  dataset.features.resize(trend.n, trend.dims);
  dataset.target.resize(trend.n);
  for (int r = 0; r < trend.n; ++r) {
    for (int d = 0; d < trend.dims; ++d) {
      dataset.features(r, d) = rng.uniform(-5.0, 5.0);
    }
    const double noise = rng.normal();
    dataset.target[r] = weights.dot(dataset.features.row(r)) + intercept +
                        trend.noise_std * noise;
  }
  dataset.task = TaskKind::Regression;
  for (int d = 0; d < trend.dims; ++d) {
    dataset.feature_names.push_back("x" + std::to_string(d));
  }
  std::string joined;
  for (int d = 0; d < trend.dims; ++d) {
    if (d) joined += ';';
    joined += format_double(weights[d]);
  }
  dataset.metadata["weights"] = joined;
  dataset.metadata["intercept"] = format_double(intercept);
  return dataset;
}

}  // namespace efold
