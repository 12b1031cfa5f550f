#include "neuroauth/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "neuroauth/error.hpp"
#include "neuroauth/random.hpp"

namespace neuroauth {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::kInvalidConfig, "config: " + msg); }

// Unknown keys are refused so that a misspelt field cannot silently fall back
// to its default.
void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) bad(std::string("unknown key '") + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

std::vector<int> read_sessions(const json& j, const char* key, std::vector<int> fallback) {
  read(j, key, fallback);
  return fallback;
}

SyntheticSpec synthetic_from_json(const json& j) {
  check_keys(j, "data.synthetic",
             {"n_users", "n_sessions", "session_seconds", "sample_rate_hz", "seed", "session_drift",
              "signature_spread"});
  SyntheticSpec s;
  read(j, "n_users", s.n_users);
  read(j, "n_sessions", s.n_sessions);
  read(j, "session_seconds", s.session_seconds);
  read(j, "sample_rate_hz", s.sample_rate_hz);
  read(j, "seed", s.seed);
  read(j, "session_drift", s.session_drift);
  read(j, "signature_spread", s.signature_spread);
  return s;
}

json synthetic_to_json(const SyntheticSpec& s) {
  return {{"n_users", s.n_users},
          {"n_sessions", s.n_sessions},
          {"session_seconds", s.session_seconds},
          {"sample_rate_hz", s.sample_rate_hz},
          {"seed", s.seed},
          {"session_drift", s.session_drift},
          {"signature_spread", s.signature_spread}};
}

PilotClassifier parse_pilot_classifier(const std::string& name) {
  if (name == "lda") return PilotClassifier::kLda;
  if (name == "svm") return PilotClassifier::kSvm;
  bad("unknown pilot classifier '" + name + "' (expected lda or svm)");
}

}  // namespace

const char* to_string(KurtosisConvention k) { return k == KurtosisConvention::kExcess ? "excess" : "raw"; }

void RunConfig::validate(bool require_data) const {
  if (manifest && synthetic) bad("data.manifest and data.synthetic are mutually exclusive");
  if (require_data && !manifest && !synthetic) bad("one of data.manifest and data.synthetic is required");
  try {
    plan.validate();
    window.validate();
    if (synthetic) {
      synthetic->validate();
      BandpassSpec b = bandpass;
      b.sample_rate_hz = synthetic->sample_rate_hz;
      b.validate();
      if (synthetic->session_seconds * synthetic->sample_rate_hz < static_cast<double>(window.window_len_samples)) {
        bad("synthetic sessions are shorter than one window");
      }
      for (const auto* part : {&plan.train, &plan.validation, &plan.test}) {
        for (int s : *part) {
          if (s < 1 || s > synthetic->n_sessions) {
            bad("split session " + std::to_string(s) + " outside the synthetic session range 1.." +
                std::to_string(synthetic->n_sessions));
          }
        }
      }
    }
    auth.trees.validate(kNumFeatures);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidConfig) throw;
    throw Error(ErrorKind::kInvalidConfig, std::string("config: ") + e.what());
  }
  if (auth.threshold_multipliers.empty()) bad("feature_selection.threshold_multipliers is empty");
  for (double m : auth.threshold_multipliers) {
    if (!(m > 0.0)) bad("threshold multipliers must be positive");
  }
  if (auth.classifiers.empty()) bad("no classifiers requested");
  for (const auto& [family, grid] : auth.grids) {
    if (grid.empty()) bad(std::string("empty grid for ") + to_string(family));
  }
  if (pilot.enabled && pilot.classifiers.empty()) bad("pilot enabled without classifiers");
  if (!(pilot.config.train_fraction > 0.0 && pilot.config.train_fraction < 1.0)) {
    bad("pilot.train_fraction must lie in (0, 1)");
  }
  if (!(pilot.config.svm_C > 0.0)) bad("pilot.svm_C must be positive");
  if (auth.workers < 0) bad("workers must be >= 0");
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir, bool require_data) {
  check_keys(j, "config",
             {"schema_version", "seed", "data", "bandpass", "window", "kurtosis", "feature_selection",
              "classifiers", "grids", "tuning_cells", "split", "balance_evaluation", "workers", "keep_going",
              "output_dir", "pilot", "permutation_control", "welch"});
  RunConfig c;
  if (j.contains("schema_version") && j.at("schema_version") != RunConfig::kSchemaVersion) {
    bad("unsupported schema_version " + j.at("schema_version").dump());
  }
  read(j, "seed", c.seed);

  const json data = j.contains("data") ? j.at("data") : json::object();
  check_keys(data, "data", {"manifest", "synthetic"});
  if (data.contains("manifest")) {
    std::filesystem::path p = data.at("manifest").get<std::string>();
    c.manifest = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (data.contains("synthetic")) c.synthetic = synthetic_from_json(data.at("synthetic"));

  if (j.contains("bandpass")) {
    const json& b = j.at("bandpass");
    check_keys(b, "bandpass", {"low_hz", "high_hz", "order"});
    read(b, "low_hz", c.bandpass.low_cut_hz);
    read(b, "high_hz", c.bandpass.high_cut_hz);
    read(b, "order", c.bandpass.order);
  }
  if (j.contains("window")) {
    const json& w = j.at("window");
    check_keys(w, "window", {"length_samples", "length_ms", "hop_samples"});
    if (w.contains("length_samples") && w.contains("length_ms")) bad("give window.length_samples or length_ms, not both");
    read(w, "length_samples", c.window.window_len_samples);
    read(w, "hop_samples", c.window.hop_samples);
    if (w.contains("length_ms")) {
      const double fs = c.synthetic ? c.synthetic->sample_rate_hz : c.bandpass.sample_rate_hz;
      c.window = WindowSpec::from_milliseconds(w.at("length_ms").get<double>(), c.window.hop_samples, fs);
    }
  }
  if (j.contains("kurtosis")) {
    const std::string k = j.at("kurtosis").get<std::string>();
    if (k == "excess") {
      c.kurtosis = KurtosisConvention::kExcess;
    } else if (k == "raw") {
      c.kurtosis = KurtosisConvention::kRaw;
    } else {
      bad("kurtosis must be 'excess' or 'raw'");
    }
  }
  if (j.contains("feature_selection")) {
    const json& f = j.at("feature_selection");
    check_keys(f, "feature_selection", {"n_trees", "max_features", "min_samples_split", "threshold_multipliers"});
    read(f, "n_trees", c.auth.trees.n_trees);
    read(f, "max_features", c.auth.trees.max_features);
    read(f, "min_samples_split", c.auth.trees.min_samples_split);
    read(f, "threshold_multipliers", c.auth.threshold_multipliers);
  }
  try {
    if (j.contains("classifiers")) {
      c.auth.classifiers.clear();
      for (const auto& name : j.at("classifiers")) c.auth.classifiers.push_back(parse_family(name.get<std::string>()));
    }
    if (j.contains("grids")) {
      check_keys(j.at("grids"), "grids", {"knn", "lda", "lsvm", "nlsvm"});
      for (const auto& [name, g] : j.at("grids").items()) {
        const ClassifierFamily f = parse_family(name);
        c.auth.grids[f] = grid_from_json(g, f);
      }
    }
    if (j.contains("tuning_cells")) {
      check_keys(j.at("tuning_cells"), "tuning_cells", {"knn", "lda", "lsvm", "nlsvm"});
      for (const auto& [name, cell] : j.at("tuning_cells").items()) {
        const ClassifierFamily f = parse_family(name);
        c.auth.tuning_cells[f] = spec_from_json(cell, f);
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidConfig) throw;
    bad(e.what());
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, "split", {"train", "validation", "test"});
    c.plan.train = read_sessions(s, "train", c.plan.train);
    c.plan.validation = read_sessions(s, "validation", c.plan.validation);
    c.plan.test = read_sessions(s, "test", c.plan.test);
  }
  read(j, "balance_evaluation", c.auth.balance_evaluation);
  read(j, "workers", c.auth.workers);
  read(j, "keep_going", c.auth.keep_going);
  if (j.contains("output_dir")) {
    std::filesystem::path p = j.at("output_dir").get<std::string>();
    c.output_dir = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (j.contains("pilot")) {
    const json& p = j.at("pilot");
    check_keys(p, "pilot", {"enabled", "classifiers", "train_fraction", "chronological", "svm_C"});
    read(p, "enabled", c.pilot.enabled);
    if (p.contains("classifiers")) {
      c.pilot.classifiers.clear();
      for (const auto& name : p.at("classifiers")) c.pilot.classifiers.push_back(parse_pilot_classifier(name.get<std::string>()));
    }
    read(p, "train_fraction", c.pilot.config.train_fraction);
    read(p, "chronological", c.pilot.config.chronological);
    read(p, "svm_C", c.pilot.config.svm_C);
  }
  read(j, "permutation_control", c.permutation_control);
  read(j, "welch", c.welch);
  c.auth.seed = c.seed;
  c.pilot.config.seed = derive_seed(c.seed, "pilot");
  c.validate(require_data);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool require_data) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "config file not found: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path(), require_data);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["seed"] = c.seed;
  if (c.manifest) j["data"]["manifest"] = c.manifest->generic_string();
  if (c.synthetic) j["data"]["synthetic"] = synthetic_to_json(*c.synthetic);
  j["bandpass"] = {{"low_hz", c.bandpass.low_cut_hz}, {"high_hz", c.bandpass.high_cut_hz}, {"order", c.bandpass.order}};
  j["window"] = {{"length_samples", c.window.window_len_samples}, {"hop_samples", c.window.hop_samples}};
  j["kurtosis"] = to_string(c.kurtosis);
  j["feature_selection"] = {{"n_trees", c.auth.trees.n_trees},
                            {"max_features", c.auth.trees.max_features},
                            {"min_samples_split", c.auth.trees.min_samples_split},
                            {"threshold_multipliers", c.auth.threshold_multipliers}};
  j["classifiers"] = json::array();
  j["grids"] = json::object();
  j["tuning_cells"] = json::object();
  for (ClassifierFamily f : c.auth.classifiers) {
    j["classifiers"].push_back(to_string(f));
    json grid = json::array();
    for (const auto& cell : c.auth.grid_for(f)) grid.push_back(cell);
    j["grids"][to_string(f)] = grid;
    j["tuning_cells"][to_string(f)] = c.auth.tuning_cell_for(f);
  }
  j["split"] = {{"train", c.plan.train}, {"validation", c.plan.validation}, {"test", c.plan.test}};
  j["balance_evaluation"] = c.auth.balance_evaluation;
  j["keep_going"] = c.auth.keep_going;
  json pilot_classifiers = json::array();
  for (auto p : c.pilot.classifiers) pilot_classifiers.push_back(to_string(p));
  j["pilot"] = {{"enabled", c.pilot.enabled},
                {"classifiers", pilot_classifiers},
                {"train_fraction", c.pilot.config.train_fraction},
                {"chronological", c.pilot.config.chronological},
                {"svm_C", c.pilot.config.svm_C}};
  j["permutation_control"] = c.permutation_control;
  j["welch"] = c.welch;
  return j;
}

std::uint64_t config_hash(const RunConfig& config) { return tag_hash(config_to_json(config).dump()); }

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace neuroauth
