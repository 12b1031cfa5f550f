#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <cmath>
#include <set>
#include <cstdlib>
#include <string>

#include "neuroauth/config.hpp"
#include "neuroauth/error.hpp"
#include "neuroauth/pipeline.hpp"
#include "neuroauth/random.hpp"
#include "neuroauth/report.hpp"

using namespace neuroauth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  return config_from_json(json::parse(R"({
    "seed": 3,
    "data": {"synthetic": {"n_users": 3, "n_sessions": 9, "session_seconds": 1.5}},
    "feature_selection": {"n_trees": 10, "threshold_multipliers": [0.5, 1.0]},
    "classifiers": ["lsvm", "nlsvm"],
    "grids": {"lsvm": {"C": [0.1, 1]}, "nlsvm": {"C": [1, 10], "gamma": ["scale"]}},
    "pilot": {"enabled": true, "classifiers": ["lda", "svm"]},
    "permutation_control": true
  })"));
}

const json& tiny_report() {
  static const json report = report_to_json(run(tiny_config()));
  return report;
}

std::set<std::string> keys(const json& j) {
  std::set<std::string> k;
  for (const auto& [key, v] : j.items()) k.insert(key);
  return k;
}

// Keys and value types with array contents collapsed to their first element;
// numbers are one type so integral-valued doubles do not flip the shape.
json skeleton(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = skeleton(v);
    return out;
  }
  if (j.is_array()) return j.empty() ? json::array() : json::array({skeleton(j.front())});
  if (j.is_number()) return "number";
  return j.type_name();
}

// Plain reimplementation of the aggregate statistics, independent of summarize().
json reader_summary(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const std::size_t m = s.size() / 2;
  const double median = s.size() % 2 ? s[m] : (s[m - 1] + s[m]) / 2.0;
  return {{"mean", mean},     {"maximum", s.back()},          {"minimum", s.front()},
          {"median", median}, {"std_population", std::sqrt(ss / n)}, {"std_sample", std::sqrt(ss / (n - 1.0))}};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("report layout") {
  const json& r = tiny_report();
  CHECK(keys(r) == std::set<std::string>{"schema_version", "provenance", "config", "dataset", "families",
                                         "permutation_control", "hypotheses", "pilot", "failures", "notes",
                                         "complete"});
  CHECK(r.at("schema_version") == kReportSchemaVersion);
  CHECK(keys(r.at("provenance")) == std::set<std::string>{"seed", "config_hash", "started_at", "finished_at"});
  CHECK(r.at("provenance").at("config_hash") == hex64(config_hash(tiny_config())));
  CHECK(r.at("config") == config_to_json(tiny_config()));
  CHECK(keys(r.at("dataset")) ==
        std::set<std::string>{"pre_processing", "post_processing", "window_counts", "split_sizes"});
  CHECK(r.at("dataset").at("window_counts").size() == 27);
  REQUIRE(r.at("families").size() == 2);
  for (const auto& f : r.at("families")) {
    CHECK(keys(f) == std::set<std::string>{"family", "users", "aggregates"});
    CHECK(f.at("users").size() == 3);
    CHECK(keys(f.at("aggregates")) ==
          std::set<std::string>{"val_accuracy", "test_accuracy", "test_f1", "selected_features"});
    for (const auto& u : f.at("users")) {
      for (const char* k : {"user_id", "best", "threshold", "selected_features", "selected_indices",
                            "threshold_trials", "grid", "val_accuracy", "test_accuracy", "test_f1", "confusion",
                            "rows", "converged"}) {
        CHECK(u.contains(k));
      }
    }
  }
  CHECK(r.at("hypotheses").at("normality").size() == 4);
  CHECK(r.at("hypotheses").at("t_tests").size() == 2);
  CHECK(r.at("pilot").size() == 2);
  CHECK(r.at("permutation_control").contains("nlsvm"));
  CHECK(r.at("complete") == true);
  CHECK(r.at("failures").empty());
}

TEST_CASE("aggregates recompute exactly from the per-user rows") {
  for (const auto& f : tiny_report().at("families")) {
    for (const char* metric : kAggregateMetrics) {
      std::vector<double> v;
      for (const auto& u : f.at("users")) v.push_back(u.at(metric).get<double>());
      CHECK(reader_summary(v) == f.at("aggregates").at(metric));
    }
  }
}

TEST_CASE("dataset counts add up") {
  const json& d = tiny_report().at("dataset");
  std::size_t windows = 0;
  for (const auto& c : d.at("window_counts")) windows += c.at("windows").get<std::size_t>();
  CHECK(d.at("post_processing").at("total") == windows);
  const auto& s = d.at("split_sizes");
  CHECK(s.at("train").get<std::size_t>() + s.at("validation").get<std::size_t>() +
            s.at("test").get<std::size_t>() ==
        windows);
  CHECK(d.at("pre_processing").at("total") == 27 * 750);
}

TEST_CASE("reruns agree once timestamps are stripped") {
  RunConfig c = tiny_config();
  c.auth.workers = 2;
  const json again = report_to_json(run(c));
  CHECK(strip_timestamps(again).dump() == strip_timestamps(tiny_report()).dump());
  const json stripped = strip_timestamps(tiny_report());
  CHECK(keys(stripped.at("provenance")) == std::set<std::string>{"seed", "config_hash"});
}

TEST_CASE("plot tables and file round trip") {
  const fs::path dir = fs::temp_directory_path() / ("neuroauth-report-" + std::to_string(Rng(std::random_device{}()).next_u64()));
  const auto files = write_plot_tables(tiny_report(), dir);
  CHECK(files.size() == 5);
  CHECK(line_count(dir / "selected_features.csv") == 1 + 6);
  CHECK(line_count(dir / "test_performance.csv") == 1 + 6);
  CHECK(line_count(dir / "pilot_confusion_lda.csv") == 1 + 3);
  write_json(tiny_report(), dir / "report.json");
  CHECK(read_json(dir / "report.json") == tiny_report());
  CHECK(format_report_table(tiny_report()).find("classifier nlsvm") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("hypothesis block from report metrics") {
  const auto fams = metrics_from_report(tiny_report());
  REQUIRE(fams.size() == 2);
  CHECK(fams[0].accuracy.size() == 3);
  FamilyMetrics flat{"flat", {0.9, 0.9, 0.9}, {0.8, 0.8, 0.8}};
  FamilyMetrics other{"other", {0.7, 0.8, 0.9}, {0.6, 0.7, 0.8}};
  const std::vector<FamilyMetrics> both{flat, other};
  const HypothesisBlock h = compute_hypotheses(both, false);
  REQUIRE(h.normality.size() == 4);
  CHECK_FALSE(h.normality[0].error.empty());  // constant sample
  CHECK(h.normality[2].error.empty());
  REQUIRE(h.t_tests.size() == 2);
  CHECK(h.t_tests[0].error.empty());
  CHECK(h.t_tests[0].result.name == "t_test:flat_vs_other:test_accuracy");
  CHECK_THROWS_AS(metrics_from_report(json::parse(R"({"families": [{"family": "x"}]})")), Error);
  CHECK_THROWS_AS(metrics_from_report(json::array()), Error);
}

TEST_CASE("report schema matches the golden file") {
  const fs::path golden = fs::path(NEUROAUTH_GOLDEN_DIR) / "report_schema.json";
  const json shape = skeleton(tiny_report());
  if (std::getenv("NEUROAUTH_UPDATE_GOLDEN")) write_json(shape, golden);
  CHECK(read_json(golden) == shape);
}
