#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "neuroauth/config.hpp"
#include "neuroauth/features.hpp"
#include "neuroauth/ingest.hpp"
#include "neuroauth/report.hpp"

namespace neuroauth {

// Runs fn, rewriting any Error as "<stage>: <message> (hint: <hint>)" with
// its kind preserved.
template <class F>
auto with_stage(const char* stage, const char* hint, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string msg = std::string(stage) + ": " + e.what();
    if (hint && *hint) msg += std::string(" (hint: ") + hint + ")";
    throw Error(e.kind(), msg);
  }
}

struct PreparedData {
  FeatureMatrix features;
  std::vector<SessionCount> sample_counts;  // per session, before windowing
  std::vector<SessionCount> window_counts;  // per session
  double sample_rate_hz{0.0};
};

// Filter, window and extract one session. filter may be null (already filtered).
FeatureMatrix session_features(const SessionRecord& record, const FilterRealization* filter,
                               const WindowSpec& window, KurtosisConvention kurtosis);

// ingest -> preprocess -> features, one session at a time so raw recordings
// never have to be resident together.
PreparedData prepare_data(const RunConfig& config);

struct RunHooks {
  // Called after each major stage with a short label.
  std::function<void(const std::string&)> progress;
};

EvaluationReport run(const RunConfig& config, const RunHooks& hooks = {});
// Same as run, on features already extracted.
EvaluationReport run_on_features(const RunConfig& config, PreparedData data, const RunHooks& hooks = {});

// report.json plus plot tables in dir; returns the files written.
std::vector<std::filesystem::path> write_outputs(const EvaluationReport& report,
                                                 const std::filesystem::path& dir);

}  // namespace neuroauth
