#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neuroauth/ingest.hpp"
#include "neuroauth/protocol.hpp"
#include "neuroauth/stats.hpp"

namespace neuroauth {

inline constexpr int kReportSchemaVersion = 1;

// Aggregated metrics, in this order, for every classifier family.
inline constexpr const char* kAggregateMetrics[] = {"val_accuracy", "test_accuracy", "test_f1",
                                                    "selected_features"};

struct FamilyReport {
  ClassifierFamily family{ClassifierFamily::kRbfSvm};
  std::vector<UserResult> users;               // ascending user id
  std::map<std::string, Summary> aggregates;  // keyed by kAggregateMetrics
};

struct HypothesisEntry {
  TestResult result;
  std::string error;  // set when the test could not be computed
};

struct HypothesisBlock {
  std::vector<HypothesisEntry> normality;  // per family: accuracy, then F1
  std::vector<HypothesisEntry> t_tests;    // per family pair: accuracy, then F1
};

struct SplitSizes {
  std::size_t train{0};
  std::size_t validation{0};
  std::size_t test{0};
};

struct EvaluationReport {
  std::uint64_t seed{0};
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  nlohmann::json config;

  std::optional<DatasetStats> pre_processing;   // per-user sample totals
  std::optional<DatasetStats> post_processing;  // per-user window totals
  std::vector<SessionCount> window_counts;      // per session
  SplitSizes split_sizes;

  std::vector<FamilyReport> families;
  // Test accuracy / F1 summaries of the label-permuted control, per family.
  std::map<ClassifierFamily, std::map<std::string, Summary>> permutation_control;
  std::optional<HypothesisBlock> hypotheses;
  std::vector<PilotReport> pilots;
  std::vector<UserFailure> failures;
  std::vector<std::string> notes;
  bool complete{true};
};

FamilyReport make_family_report(ClassifierFamily family, std::vector<UserResult> users);
std::map<std::string, Summary> summarize_metrics(std::span<const UserResult> users);

// Per-family metric samples as read back from a report.
struct FamilyMetrics {
  std::string family;
  std::vector<double> accuracy;
  std::vector<double> f1;
};

HypothesisBlock compute_hypotheses(std::span<const FamilyMetrics> families, bool welch);
std::vector<FamilyMetrics> metrics_from_report(const nlohmann::json& report);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const TestResult& t);
nlohmann::json to_json(const HypothesisBlock& h);
nlohmann::json to_json(const PilotReport& p);
nlohmann::json report_to_json(const EvaluationReport& report);

// Drops provenance timestamps; two runs of one config compare equal after this.
nlohmann::json strip_timestamps(nlohmann::json report);

std::string utc_timestamp();

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// Plain-text tables behind the per-user bar charts and the pilot confusion
// matrices. Returns the files written.
std::vector<std::filesystem::path> write_plot_tables(const nlohmann::json& report,
                                                     const std::filesystem::path& dir);

// Human-readable per-user and aggregate table.
std::string format_report_table(const nlohmann::json& report);

}  // namespace neuroauth
