#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neuroauth/dsp.hpp"
#include "neuroauth/protocol.hpp"
#include "neuroauth/synthetic.hpp"

namespace neuroauth {

struct PilotOptions {
  bool enabled{false};
  std::vector<PilotClassifier> classifiers{PilotClassifier::kLda, PilotClassifier::kSvm};
  PilotConfig config;
};

// Exactly one of manifest / synthetic is set.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::optional<std::filesystem::path> manifest;
  std::optional<SyntheticSpec> synthetic;
  BandpassSpec bandpass;  // sample rate taken from the data source
  WindowSpec window;
  KurtosisConvention kurtosis{KurtosisConvention::kExcess};
  AuthConfig auth;  // auth.seed mirrors `seed`
  SplitPlan plan;
  std::uint64_t seed{42};
  std::filesystem::path output_dir{"neuroauth-out"};
  PilotOptions pilot;
  bool permutation_control{false};
  bool welch{false};

  // Throws kInvalidConfig; touches no data. Commands that work on an
  // extracted feature matrix pass require_data = false.
  void validate(bool require_data = true) const;
};

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                           bool require_data = true);
RunConfig load_config(const std::filesystem::path& path, bool require_data = true);

// Canonical form. Worker count and output directory are execution details
// and are left out, so reports do not depend on them.
nlohmann::json config_to_json(const RunConfig& config);

// FNV-1a of the canonical JSON text.
std::uint64_t config_hash(const RunConfig& config);
std::string hex64(std::uint64_t v);

const char* to_string(KurtosisConvention k);

}  // namespace neuroauth
