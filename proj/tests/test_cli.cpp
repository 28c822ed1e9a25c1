#include <doctest.h>

#include "efold/cli.hpp"
#include "efold/core.hpp"
#include "efold/harness.hpp"
#include "efold/ingestion.hpp"
#include "efold/rng.hpp"

#include "test_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

using namespace efold;
namespace fs = std::filesystem;

namespace {

// Splits serialized text into lines and drops the final comma-separated cell
// of each line. Record rows never quote their last cell (fold_seconds is a
// semicolon-joined number list), so rfind(',') is safe here.
std::string strip_last_column(const std::string& text) {
  std::istringstream stream(text);
  std::string out;
  std::string line;
  while (std::getline(stream, line)) {
    const std::size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
  }
  return out;
}

RunRecord full_record() {
  RunRecord record;
  record.dataset = "blobs-a";
  record.learner = "gaussian_nb";
  record.task = TaskKind::Multiclass;
  record.metric = Metric::F1Weighted;
  record.mode = RunMode::Simulate;
  record.seed = 0xDEADBEEFCAFEF00DULL;
  record.fold_scores = {0.8, 0.9, 0.85, 0.84, 0.83, 0.86, 0.87, 0.84, 0.85, 0.86};
  record.per_fold_wall_time = {0.01, 0.02, 0.01, 0.03, 0.01, 0.02, 0.01, 0.01, 0.02, 0.01};
  record.stop_fold = 6;
  record.saved_folds = 4;
  record.m_e = 0.845;
  record.m_full = 0.85;
  record.ci_low = 0.83;
  record.ci_high = 0.87;
  record.within_ci = true;
  record.pct_diff = 0.588;
  return record;
}

std::vector<std::string> cells_of(const RunRecord& record) {
  const auto rows = parse_csv_text(record_to_csv_row(record) + "\n", "mem");
  REQUIRE(rows.size() == 1);
  return rows.front();
}

void check_same_record(const RunRecord& a, const RunRecord& b) {
  CHECK(a.dataset == b.dataset);
  CHECK(a.learner == b.learner);
  CHECK(a.task == b.task);
  CHECK(a.metric == b.metric);
  CHECK(a.mode == b.mode);
  CHECK(a.seed == b.seed);
  CHECK(a.fold_scores == b.fold_scores);
  CHECK(a.per_fold_wall_time == b.per_fold_wall_time);
  CHECK(a.stop_fold == b.stop_fold);
  CHECK(a.m_e == b.m_e);
  CHECK(a.saved_folds == b.saved_folds);
  CHECK(a.m_full == b.m_full);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.within_ci == b.within_ci);
  CHECK(a.pct_diff == b.pct_diff);
  CHECK(a.failed == b.failed);
  CHECK(a.failed_fold == b.failed_fold);
  CHECK(a.failure_message == b.failure_message);
}

std::string two_blob_config(const fs::path& dir, const std::string& extra = "") {
  const fs::path out = dir / "out";
  std::string text = R"({
  "base_seed": 4242,
  "runs_per_combination": 3,
  "output_dir": ")" + out.generic_string() + R"(",
  "datasets": [
    {"name": "blobs-a",
     "synthetic": {"kind": "gaussian_blobs", "classes": 3, "per_class": 20,
                   "dims": 3, "spread": 1.2, "seed": 11}},
    {"name": "blobs-b",
     "synthetic": {"kind": "gaussian_blobs", "classes": 2, "per_class": 25,
                   "dims": 2, "spread": 1.0, "seed": 12}}
  ],
  "learners": ["gaussian_nb", "knn_classifier"])" + extra + "\n}\n";
  const fs::path path = dir / "config.json";
  testutil::write_text(path, text);
  return path.string();
}

}  // namespace

TEST_CASE("derive_seed matches its published chain") {
  CHECK(derive_seed(0, 0, 0) == 3982070227906906278ULL);
  CHECK(derive_seed(922337, 0, 0) == 16592837939101585495ULL);
  CHECK(derive_seed(922337, 3, 41) == 14478977993174153244ULL);

  constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  for (const std::uint64_t base : {0ULL, 1ULL, 922337ULL, 0xFFFFFFFFFFFFFFFFULL}) {
    for (std::size_t c = 0; c < 5; ++c) {
      for (std::size_t r = 0; r < 5; ++r) {
        const std::uint64_t expected =
            splitmix64(splitmix64(base + kGamma * (c + 1)) + kGamma * (r + 1));
        CHECK(derive_seed(base, c, r) == expected);
      }
    }
  }
}

TEST_CASE("derive_seed separates combinations and runs") {
  std::set<std::uint64_t> seen;
  for (const std::uint64_t base : {7ULL, 8ULL, 1000000ULL, 5489ULL}) {
    for (std::size_t c = 0; c < 8; ++c) {
      for (std::size_t r = 0; r < 16; ++r) {
        seen.insert(derive_seed(base, c, r));
      }
    }
  }
  CHECK(seen.size() == 4u * 8u * 16u);
}

TEST_CASE("records header and version tag are pinned") {
  CHECK(std::string(kRecordsVersion) == "# efold-records-v1");
  CHECK(records_header() ==
        "dataset,learner,task,metric,mode,seed,stop_fold,saved_folds,m_e,m_full,"
        "ci_low,ci_high,within_ci,pct_diff,failed,failed_fold,failure_message,"
        "fold_scores,fold_seconds");

  const auto rows = parse_csv_text(records_header() + "\n", "mem");
  REQUIRE(rows.size() == 1);
  CHECK(rows.front().size() == 19);
}

TEST_CASE("record row round-trips through CSV") {
  SUBCASE("full simulate record") {
    const RunRecord record = full_record();
    check_same_record(record_from_csv_row(cells_of(record)), record);
  }

  SUBCASE("failed record with hostile message") {
    RunRecord record;
    record.dataset = "iris, mostly";
    record.learner = "decision_tree_classifier";
    record.task = TaskKind::Binary;
    record.metric = Metric::F1Binary;
    record.mode = RunMode::EarlyStop;
    record.seed = 77;
    record.fold_scores = {0.5, 0.6};
    record.per_fold_wall_time = {0.1, 0.1};
    record.stop_fold = 0;
    record.saved_folds = 0;
    record.m_e = 0.55;
    record.failed = true;
    record.failed_fold = 3;
    record.failure_message = "fit blew up: \"singular\" matrix,\nretry later";
    check_same_record(record_from_csv_row(cells_of(record)), record);
  }

  SUBCASE("early-stop record keeps optionals absent") {
    RunRecord record;
    record.dataset = "trend";
    record.learner = "linear_regression";
    record.task = TaskKind::Regression;
    record.metric = Metric::MAE;
    record.mode = RunMode::EarlyStop;
    record.seed = 1;
    record.fold_scores = {1.0, 1.1, 1.05, 1.04};
    record.per_fold_wall_time = {0.2, 0.2, 0.2, 0.2};
    record.stop_fold = 4;
    record.saved_folds = 6;
    record.m_e = 1.0475;
    const RunRecord parsed = record_from_csv_row(cells_of(record));
    CHECK_FALSE(parsed.m_full.has_value());
    CHECK_FALSE(parsed.ci_low.has_value());
    CHECK_FALSE(parsed.ci_high.has_value());
    CHECK_FALSE(parsed.within_ci.has_value());
    CHECK_FALSE(parsed.pct_diff.has_value());
    CHECK_FALSE(parsed.failed);
    CHECK_FALSE(parsed.failed_fold.has_value());
    check_same_record(parsed, record);
  }
}

TEST_CASE("record_from_csv_row rejects malformed rows") {
  const RunRecord record = full_record();

  SUBCASE("wrong cell count") {
    auto cells = cells_of(record);
    cells.pop_back();
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells),
                         doctest::Contains("expected 19 cells"), std::invalid_argument);
  }

  SUBCASE("metric does not match task") {
    auto cells = cells_of(record);
    cells[3] = "mae";
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells),
                         doctest::Contains("does not match task"), std::invalid_argument);
  }

  SUBCASE("bad seed") {
    auto cells = cells_of(record);
    cells[5] = "12x";
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells), doctest::Contains("column 'seed'"),
                         std::invalid_argument);
  }

  SUBCASE("bad stop_fold") {
    auto cells = cells_of(record);
    cells[6] = "4.5";
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells),
                         doctest::Contains("column 'stop_fold'"), std::invalid_argument);
  }

  SUBCASE("bad within_ci flag") {
    auto cells = cells_of(record);
    cells[12] = "yes";
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells),
                         doctest::Contains("column 'within_ci'"), std::invalid_argument);
  }

  SUBCASE("score and time lists must agree in length") {
    auto cells = cells_of(record);
    cells[18] = "0.01;0.02";
    CHECK_THROWS_WITH_AS(record_from_csv_row(cells), doctest::Contains("lengths differ"),
                         std::invalid_argument);
  }

  SUBCASE("unknown task") {
    auto cells = cells_of(record);
    cells[2] = "ordinal";
    CHECK_THROWS_AS(record_from_csv_row(cells), std::invalid_argument);
  }
}

TEST_CASE("records files round-trip on disk") {
  const fs::path dir = testutil::scratch_dir("records");
  const std::string path = (dir / "records.csv").string();

  RunRecord plain = full_record();
  RunRecord failed;
  failed.dataset = "blobs-a";
  failed.learner = "knn_classifier";
  failed.task = TaskKind::Multiclass;
  failed.metric = Metric::F1Weighted;
  failed.mode = RunMode::Simulate;
  failed.seed = 9;
  failed.fold_scores = {0.7};
  failed.per_fold_wall_time = {0.4};
  failed.stop_fold = 0;
  failed.saved_folds = 0;
  failed.m_e = 0.7;
  failed.failed = true;
  failed.failed_fold = 2;
  failed.failure_message = "line one\nline two";

  const std::vector<RunRecord> records = {plain, failed, plain};
  write_records_file(path, records);

  const std::vector<RunRecord> loaded = read_records_file(path);
  REQUIRE(loaded.size() == 3);
  check_same_record(loaded[0], plain);
  check_same_record(loaded[1], failed);
  check_same_record(loaded[2], plain);
}

TEST_CASE("read_records_file reports structural problems") {
  const fs::path dir = testutil::scratch_dir("records-bad");

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(read_records_file((dir / "ghost.csv").string()),
                         doctest::Contains("cannot open records file"), std::runtime_error);
  }

  SUBCASE("wrong version line") {
    const std::string path = (dir / "v0.csv").string();
    testutil::write_text(path, "# efold-records-v0\n" + records_header() + "\n");
    CHECK_THROWS_WITH_AS(read_records_file(path), doctest::Contains(":1:"),
                         std::invalid_argument);
  }

  SUBCASE("wrong header") {
    const std::string path = (dir / "h.csv").string();
    testutil::write_text(path,
                         std::string(kRecordsVersion) + "\ndataset,learner\n");
    CHECK_THROWS_WITH_AS(read_records_file(path),
                         doctest::Contains(":2: unexpected records header"),
                         std::invalid_argument);
  }

  SUBCASE("header only means no records") {
    const std::string path = (dir / "empty.csv").string();
    testutil::write_text(path, std::string(kRecordsVersion) + "\n" + records_header() + "\n");
    CHECK_THROWS_WITH_AS(read_records_file(path), doctest::Contains("no records"),
                         std::invalid_argument);
  }

  SUBCASE("malformed row names its line") {
    // Data rows start on file line 3 (version, header, then records).
    const std::string path = (dir / "row.csv").string();
    testutil::write_text(path, std::string(kRecordsVersion) + "\n" + records_header() +
                                   "\nnot,enough,cells\n");
    CHECK_THROWS_WITH_AS(read_records_file(path), doctest::Contains(":3:"),
                         std::invalid_argument);
  }

  SUBCASE("line numbers track multiline fields") {
    // The first record's failure_message spans two physical lines, so the
    // malformed second record starts on file line 5.
    RunRecord first = full_record();
    first.failure_message = "a\nb";
    const std::string path = (dir / "multiline.csv").string();
    testutil::write_text(path, std::string(kRecordsVersion) + "\n" + records_header() +
                                   "\n" + record_to_csv_row(first) + "\nbad,row\n");
    CHECK_THROWS_WITH_AS(read_records_file(path), doctest::Contains(":5:"),
                         std::invalid_argument);
  }
}

TEST_CASE("load_experiment_config parses a full config") {
  const fs::path dir = testutil::scratch_dir("config-full");
  testutil::write_text(dir / "toy.csv", "x,y,label\n1,2,0\n3,4,1\n");

  const std::string text = R"({
  "base_seed": 99,
  "runs_per_combination": 7,
  "mode": "early-stop",
  "workers": 4,
  "output_dir": "out/sub",
  "ci_uses_standard_error": false,
  "efold": {"e_max": 12, "count_threshold": 3, "stability_tolerance": 0.1},
  "datasets": [
    {"name": "toy", "path": "toy.csv", "target_column": "label", "task": "binary",
     "transforms": [{"op": "drop_column", "column": "y"}, {"op": "encode_target"}]},
    {"name": "blobs", "synthetic": {"kind": "gaussian_blobs", "classes": 4}}
  ],
  "learners": ["knn_classifier", "decision_tree_classifier"]
})";
  const fs::path path = dir / "config.json";
  testutil::write_text(path, text);

  const ExperimentConfig config = load_experiment_config(path.string());
  CHECK(config.base_seed == 99);
  CHECK(config.runs_per_combination == 7);
  CHECK(config.mode == RunMode::EarlyStop);
  CHECK(config.workers == 4);
  CHECK_FALSE(config.ci_uses_standard_error);
  CHECK(config.efold.e_max == 12);
  CHECK(config.efold.count_threshold == 3);
  CHECK(config.efold.stability_tolerance == doctest::Approx(0.1));

  // Relative paths resolve against the config file's directory.
  CHECK(fs::path(config.output_dir) == dir / "out/sub");
  REQUIRE(config.datasets.size() == 2);
  const auto& manifest = std::get<DatasetManifest>(config.datasets[0].source);
  CHECK(fs::path(manifest.path) == dir / "toy.csv");
  CHECK(manifest.target_column == "label");
  CHECK(manifest.task == TaskKind::Binary);
  CHECK(manifest.transforms.size() == 2);
  CHECK(config.datasets[0].name() == "toy");

  const auto& spec = std::get<SyntheticSpec>(config.datasets[1].source);
  CHECK(spec.name == "blobs");
  CHECK(std::get<GaussianBlobs>(spec.kind).classes == 4);
  CHECK(config.datasets[1].name() == "blobs");

  REQUIRE(config.learners.size() == 2);
  CHECK(config.learners[0] == LearnerKind::KnnClassifier);
  CHECK(config.learners[1] == LearnerKind::DecisionTreeClassifier);
}

TEST_CASE("load_experiment_config fills defaults") {
  const fs::path dir = testutil::scratch_dir("config-defaults");
  const std::string text = R"({
  "base_seed": 1,
  "output_dir": "out",
  "datasets": [{"name": "b", "synthetic": {"kind": "gaussian_blobs"}}],
  "learners": ["knn_classifier"]
})";
  const fs::path path = dir / "config.json";
  testutil::write_text(path, text);

  const ExperimentConfig config = load_experiment_config(path.string());
  CHECK(config.runs_per_combination == 100);
  CHECK(config.mode == RunMode::Simulate);
  CHECK(config.workers == 1);
  CHECK(config.ci_uses_standard_error);
  CHECK(config.efold.e_max == 10);
  CHECK(config.efold.count_threshold == 2);
  CHECK(config.efold.stability_tolerance == doctest::Approx(0.05));
}

TEST_CASE("load_experiment_config rejects malformed configs") {
  const fs::path dir = testutil::scratch_dir("config-bad");
  const auto write_config = [&dir](const std::string& text) {
    static int counter = 0;
    const fs::path path = dir / ("bad" + std::to_string(counter++) + ".json");
    testutil::write_text(path, text);
    return path.string();
  };
  const std::string blobs =
      R"([{"name": "b", "synthetic": {"kind": "gaussian_blobs"}}])";

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_experiment_config((dir / "ghost.json").string()),
                         doctest::Contains("cannot open config"), std::runtime_error);
  }
  SUBCASE("invalid JSON") {
    CHECK_THROWS_AS(load_experiment_config(write_config("{not json")),
                    std::invalid_argument);
  }
  SUBCASE("top level must be an object") {
    CHECK_THROWS_WITH_AS(load_experiment_config(write_config("[1, 2]")),
                         doctest::Contains("expected an object"), std::invalid_argument);
  }
  SUBCASE("unknown top-level key") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": )" + blobs +
            R"(, "learners": ["knn_classifier"], "bogus": 1})")),
        doctest::Contains("unknown key 'bogus'"), std::invalid_argument);
  }
  SUBCASE("missing base_seed") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(R"({"output_dir": "o", "datasets": )" + blobs +
                                            R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("missing key 'base_seed'"), std::invalid_argument);
  }
  SUBCASE("missing output_dir") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(R"({"base_seed": 1, "datasets": )" + blobs +
                                            R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("missing key 'output_dir'"), std::invalid_argument);
  }
  SUBCASE("empty datasets") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": [], "learners": ["knn_classifier"]})")),
        doctest::Contains("non-empty array"), std::invalid_argument);
  }
  SUBCASE("zero runs") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "runs_per_combination": 0, "datasets": )" +
            blobs + R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("runs_per_combination"), std::invalid_argument);
  }
  SUBCASE("zero workers") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "workers": 0, "datasets": )" + blobs +
            R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("workers"), std::invalid_argument);
  }
  SUBCASE("duplicate dataset names") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": [
                 {"name": "b", "synthetic": {"kind": "gaussian_blobs"}},
                 {"name": "b", "synthetic": {"kind": "linear_trend"}}],
                "learners": ["knn_classifier"]})")),
        doctest::Contains("duplicate dataset name 'b'"), std::invalid_argument);
  }
  SUBCASE("duplicate learners") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": )" + blobs +
            R"(, "learners": ["knn_classifier", "knn_classifier"]})")),
        doctest::Contains("duplicate learner 'knn_classifier'"), std::invalid_argument);
  }
  SUBCASE("unknown learner") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": )" + blobs +
            R"(, "learners": ["knn_classifier", "perceptron"]})")),
        doctest::Contains("learners[1]"), std::invalid_argument);
  }
  SUBCASE("unknown synthetic kind") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": [
                 {"name": "m", "synthetic": {"kind": "moons"}}], "learners": ["knn_classifier"]})")),
        doctest::Contains("unknown synthetic kind 'moons'"), std::invalid_argument);
  }
  SUBCASE("bad mode") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "mode": "both", "datasets": )" + blobs +
            R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("mode"), std::invalid_argument);
  }
  SUBCASE("bad transform op") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": [
                 {"name": "t", "path": "t.csv", "target_column": "y", "task": "binary",
                  "transforms": [{"op": "normalize"}]}], "learners": ["knn_classifier"]})")),
        doctest::Contains("unknown transform 'normalize'"), std::invalid_argument);
  }
  SUBCASE("efold bounds") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "efold": {"e_max": 3}, "datasets": )" +
            blobs + R"(, "learners": ["knn_classifier"]})")),
        doctest::Contains("efold"), std::invalid_argument);
  }
  SUBCASE("synthetic entry rejects manifest keys") {
    CHECK_THROWS_WITH_AS(
        load_experiment_config(write_config(
            R"({"base_seed": 1, "output_dir": "o", "datasets": [
                 {"name": "b", "path": "x.csv",
                  "synthetic": {"kind": "gaussian_blobs"}}], "learners": ["knn_classifier"]})")),
        doctest::Contains("unknown key 'path'"), std::invalid_argument);
  }
}

TEST_CASE("cmd_validate reports every problem or ok") {
  const fs::path dir = testutil::scratch_dir("validate");

  SUBCASE("clean config prints ok") {
    const std::string path = two_blob_config(dir);
    std::ostringstream out, err;
    CHECK(cmd_validate(path, out, err) == kExitOk);
    CHECK(out.str() == "ok\n");
    CHECK(err.str().empty());
  }

  SUBCASE("bundled reference datasets validate") {
    const fs::path data = testutil::repo_root() / "data";
    const std::string text = R"({
  "base_seed": 1,
  "output_dir": "out",
  "datasets": [
    {"name": "iris", "path": ")" + (data / "iris.csv").generic_string() + R"(",
     "target_column": "species", "task": "multiclass",
     "transforms": [{"op": "encode_target"}]}
  ],
  "learners": ["knn_classifier", "gaussian_nb"]
})";
    const fs::path path = dir / "iris.json";
    testutil::write_text(path, text);
    std::ostringstream out, err;
    CHECK(cmd_validate(path.string(), out, err) == kExitOk);
    CHECK(out.str() == "ok\n");
  }

  SUBCASE("config errors go to stderr with exit 1") {
    const fs::path path = dir / "broken.json";
    testutil::write_text(path, "{\"base_seed\": 1}");
    std::ostringstream out, err;
    CHECK(cmd_validate(path.string(), out, err) == kExitConfigError);
    CHECK(out.str().empty());
    CHECK(err.str().find("config:") != std::string::npos);
  }

  SUBCASE("all dataset problems are listed at once") {
    const std::string text = R"({
  "base_seed": 1,
  "output_dir": "out",
  "datasets": [
    {"name": "missing", "path": "ghost.csv", "target_column": "y", "task": "binary"},
    {"name": "blobs", "synthetic": {"kind": "gaussian_blobs", "classes": 3}}
  ],
  "learners": ["knn_classifier", "ridge"]
})";
    const fs::path path = dir / "multi.json";
    testutil::write_text(path, text);
    std::ostringstream out, err;
    CHECK(cmd_validate(path.string(), out, err) == kExitConfigError);
    const std::string report = out.str();
    CHECK(report.find("ghost.csv") != std::string::npos);
    CHECK(report.find("learner ridge is incompatible with dataset blobs") !=
          std::string::npos);
    // The broken CSV must not hide the incompatibility check on the healthy
    // dataset.
    CHECK(report.find("task multiclass") != std::string::npos);
  }
}

TEST_CASE("cmd_run writes records and summary artifacts") {
  const fs::path dir = testutil::scratch_dir("run");
  const std::string config = two_blob_config(dir);

  std::ostringstream out, err;
  REQUIRE(cmd_run(RunOptions{config, std::nullopt, std::nullopt, false}, out, err) ==
          kExitOk);
  CHECK(err.str().empty());
  CHECK(out.str().find("runs: 12 aggregated, 0 failed") != std::string::npos);

  const fs::path out_dir = dir / "out";
  REQUIRE(fs::exists(out_dir / "records.csv"));
  CHECK(fs::exists(out_dir / "summary.txt"));
  CHECK(fs::exists(out_dir / "within_ci_distribution.tsv"));
  CHECK(fs::exists(out_dir / "stop_fold_histogram.tsv"));
  CHECK(fs::exists(out_dir / "pct_diff_by_task.tsv"));

  // Version line + header + 2 datasets x 2 learners x 3 runs.
  const std::string records = testutil::read_text(out_dir / "records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 14);

  const std::vector<RunRecord> loaded = read_records_file((out_dir / "records.csv").string());
  REQUIRE(loaded.size() == 12);
  std::size_t combination = 0;
  std::size_t index = 0;
  for (const std::string& dataset : {"blobs-a", "blobs-b"}) {
    for (const std::string& learner : {"gaussian_nb", "knn_classifier"}) {
      for (std::size_t run = 0; run < 3; ++run, ++index) {
        CHECK(loaded[index].dataset == dataset);
        CHECK(loaded[index].learner == learner);
        CHECK(loaded[index].seed == derive_seed(4242, combination, run));
        CHECK(loaded[index].mode == RunMode::Simulate);
        CHECK(loaded[index].fold_scores.size() == 10);
      }
      ++combination;
    }
  }

  const nlohmann::json summary =
      nlohmann::json::parse(testutil::read_text(out_dir / "summary.json"));
  CHECK(summary.at("schema") == "efold-summary-v1");
  CHECK(summary.at("mode") == "simulate");
  CHECK(summary.at("e_max") == 10);
  CHECK(summary.at("total_runs") == 12);
  CHECK(summary.at("failed_runs") == 0);
  CHECK(summary.at("combinations").size() == 4);
  for (const auto& row : summary.at("combinations")) {
    CHECK(row.at("runs") == 3);
  }
  CHECK(summary.at("overall").at("mean_stop_fold").get<double>() >= 4.0);
}

TEST_CASE("cmd_run records are deterministic up to wall time") {
  const fs::path dir_a = testutil::scratch_dir("det-a");
  const fs::path dir_b = testutil::scratch_dir("det-b");
  std::ostringstream sink;
  REQUIRE(cmd_run(RunOptions{two_blob_config(dir_a)}, sink, sink) == kExitOk);
  REQUIRE(cmd_run(RunOptions{two_blob_config(dir_b)}, sink, sink) == kExitOk);

  const std::string a = testutil::read_text(dir_a / "out" / "records.csv");
  const std::string b = testutil::read_text(dir_b / "out" / "records.csv");
  CHECK(strip_last_column(a) == strip_last_column(b));

  // Worker count must not change results either.
  const fs::path dir_c = testutil::scratch_dir("det-c");
  REQUIRE(cmd_run(RunOptions{two_blob_config(dir_c), std::nullopt, 4, false}, sink, sink) ==
          kExitOk);
  const std::string c = testutil::read_text(dir_c / "out" / "records.csv");
  CHECK(strip_last_column(a) == strip_last_column(c));
}

TEST_CASE("cmd_run honors EFOLD_OUTPUT_DIR") {
  const fs::path dir = testutil::scratch_dir("env-config");
  const fs::path redirected = testutil::scratch_dir("env-redirect");
  const std::string config = two_blob_config(dir);

  REQUIRE(setenv("EFOLD_OUTPUT_DIR", redirected.c_str(), 1) == 0);
  std::ostringstream out, err;
  const int exit_code = cmd_run(RunOptions{config}, out, err);
  unsetenv("EFOLD_OUTPUT_DIR");

  REQUIRE(exit_code == kExitOk);
  CHECK(fs::exists(redirected / "records.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "records.csv"));
}

TEST_CASE("cmd_run early-stop mode skips the ground-truth summary") {
  const fs::path dir = testutil::scratch_dir("earlystop");
  const std::string config = two_blob_config(dir);

  std::ostringstream out, err;
  REQUIRE(cmd_run(RunOptions{config, RunMode::EarlyStop, std::nullopt, false}, out, err) ==
          kExitOk);
  CHECK(out.str().find("early-stop mode") != std::string::npos);

  const fs::path out_dir = dir / "out";
  CHECK(fs::exists(out_dir / "records.csv"));
  CHECK_FALSE(fs::exists(out_dir / "summary.json"));
  CHECK_FALSE(fs::exists(out_dir / "summary.txt"));

  const std::vector<RunRecord> loaded = read_records_file((out_dir / "records.csv").string());
  REQUIRE(loaded.size() == 12);
  for (const RunRecord& record : loaded) {
    CHECK(record.mode == RunMode::EarlyStop);
    CHECK(record.fold_scores.size() == static_cast<std::size_t>(record.stop_fold));
    CHECK_FALSE(record.m_full.has_value());
  }
}

TEST_CASE("cmd_run rejects broken configs with exit 1") {
  const fs::path dir = testutil::scratch_dir("run-bad");
  const fs::path path = dir / "bad.json";
  testutil::write_text(path, R"({
  "base_seed": 1,
  "output_dir": "out",
  "datasets": [{"name": "b", "synthetic": {"kind": "gaussian_blobs"}}],
  "learners": ["ridge"]
})");
  // Ridge cannot score a classification dataset; materialization-time
  // validation must catch the pairing before any run starts.
  std::ostringstream out, err;
  CHECK(cmd_run(RunOptions{path.string()}, out, err) == kExitConfigError);
  CHECK_FALSE(err.str().empty());
  CHECK_FALSE(fs::exists(dir / "out" / "records.csv"));
}

TEST_CASE("cmd_report rebuilds summaries from records") {
  const fs::path dir = testutil::scratch_dir("report");
  const std::string config = two_blob_config(dir);
  std::ostringstream sink;
  REQUIRE(cmd_run(RunOptions{config}, sink, sink) == kExitOk);
  const fs::path out_dir = dir / "out";
  const std::string records = (out_dir / "records.csv").string();

  SUBCASE("report reproduces the run summary byte for byte") {
    const fs::path report_dir = testutil::scratch_dir("report-out");
    std::ostringstream out, err;
    REQUIRE(cmd_report({records}, report_dir.string(), out, err) == kExitOk);
    CHECK(out.str().find("runs: 12 aggregated, 0 failed") != std::string::npos);
    CHECK(testutil::read_text(report_dir / "summary.json") ==
          testutil::read_text(out_dir / "summary.json"));
    CHECK(testutil::read_text(report_dir / "stop_fold_histogram.tsv") ==
          testutil::read_text(out_dir / "stop_fold_histogram.tsv"));
    CHECK(testutil::read_text(report_dir / "pct_diff_by_task.tsv") ==
          testutil::read_text(out_dir / "pct_diff_by_task.tsv"));
  }

  SUBCASE("empty output_dir writes next to the first records file") {
    const fs::path copy_dir = testutil::scratch_dir("report-default");
    fs::copy_file(records, copy_dir / "records.csv");
    std::ostringstream out, err;
    REQUIRE(cmd_report({(copy_dir / "records.csv").string()}, "", out, err) == kExitOk);
    CHECK(fs::exists(copy_dir / "summary.json"));
  }

  SUBCASE("several records files merge into one report") {
    const fs::path merge_dir = testutil::scratch_dir("report-merge");
    std::ostringstream out, err;
    REQUIRE(cmd_report({records, records}, merge_dir.string(), out, err) == kExitOk);
    const nlohmann::json merged =
        nlohmann::json::parse(testutil::read_text(merge_dir / "summary.json"));
    const nlohmann::json single =
        nlohmann::json::parse(testutil::read_text(out_dir / "summary.json"));
    CHECK(merged.at("total_runs") == 24);
    // Doubling every record leaves all the means untouched.
    CHECK(merged.at("overall").at("mean_stop_fold") ==
          single.at("overall").at("mean_stop_fold"));
    CHECK(merged.at("overall").at("within_ci_fraction") ==
          single.at("overall").at("within_ci_fraction"));
  }

  SUBCASE("missing records file exits 3") {
    std::ostringstream out, err;
    CHECK(cmd_report({(dir / "ghost.csv").string()}, dir.string(), out, err) ==
          kExitIoError);
    CHECK(err.str().find("cannot open records file") != std::string::npos);
  }

  SUBCASE("header-only records file exits 1") {
    const fs::path stub = dir / "stub.csv";
    testutil::write_text(stub,
                         std::string(kRecordsVersion) + "\n" + records_header() + "\n");
    std::ostringstream out, err;
    CHECK(cmd_report({stub.string()}, dir.string(), out, err) == kExitConfigError);
    CHECK(err.str().find("no records") != std::string::npos);
  }

  SUBCASE("early-stop records cannot be aggregated") {
    const fs::path early_dir = testutil::scratch_dir("report-early");
    const std::string early_config = two_blob_config(early_dir);
    std::ostringstream run_out, run_err;
    REQUIRE(cmd_run(RunOptions{early_config, RunMode::EarlyStop, std::nullopt, false},
                    run_out, run_err) == kExitOk);
    std::ostringstream out, err;
    CHECK(cmd_report({(early_dir / "out" / "records.csv").string()}, early_dir.string(),
                     out, err) == kExitConfigError);
    CHECK_FALSE(err.str().empty());
  }

  SUBCASE("no records files given exits 1") {
    std::ostringstream out, err;
    CHECK(cmd_report({}, dir.string(), out, err) == kExitConfigError);
  }
}
