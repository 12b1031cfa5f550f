#include "neuroauth/pipeline.hpp"

#include <memory>

#include "neuroauth/error.hpp"
#include "neuroauth/parallel.hpp"
#include "neuroauth/random.hpp"
#include "neuroauth/synthetic.hpp"

namespace neuroauth {

FeatureMatrix session_features(const SessionRecord& record, const FilterRealization* filter,
                               const WindowSpec& window, KurtosisConvention kurtosis) {
  auto shared = std::make_shared<const SessionRecord>(filter ? apply_filter(*filter, record) : record);
  const WindowedSession windows = segment_windows(std::move(shared), window);
  return build_feature_matrix(std::span<const WindowedSession>(&windows, 1), kurtosis);
}

PreparedData prepare_data(const RunConfig& config) {
  config.validate();
  PreparedData data;

  struct Source {
    int user;
    int session;
  };
  std::vector<Source> sources;
  DatasetManifest manifest;
  SyntheticSpec synth;
  std::vector<UserSignature> signatures;
  if (config.manifest) {
    manifest = with_stage("ingest", "check the manifest path and its schema", [&] { return load_manifest(*config.manifest); });
    data.sample_rate_hz = manifest.sample_rate_hz;
    for (const auto& e : manifest.entries) sources.push_back({e.user_id, e.session_id});
  } else {
    synth = *config.synthetic;
    signatures = with_stage("synth", "reduce session_drift or signature_spread",
                            [&] { return synth.signatures.empty() ? derive_signatures(synth) : synth.signatures; });
    data.sample_rate_hz = synth.sample_rate_hz;
    for (int u = 1; u <= synth.n_users; ++u) {
      for (int s = 1; s <= synth.n_sessions; ++s) sources.push_back({u, s});
    }
  }

  BandpassSpec band = config.bandpass;
  band.sample_rate_hz = data.sample_rate_hz;
  const FilterRealization filter = with_stage("preprocess", "band edges must satisfy 0 < low < high < fs/2", [&] {
    band.validate();
    return design_bandpass(band);
  });

  std::vector<FeatureMatrix> parts(sources.size());
  std::vector<std::size_t> samples(sources.size());
  parallel_for(
      sources.size(),
      [&](std::size_t i) {
        const Source src = sources[i];
        const SessionRecord rec =
            config.manifest
                ? with_stage("ingest", "re-export the session CSV or fix its manifest entry",
                             [&] { return load_session(manifest, src.user, src.session); })
                : with_stage("synth", "", [&] { return generate_session(synth, signatures, src.user, src.session); });
        samples[i] = rec.n_samples();
        parts[i] = with_stage("preprocess", "inspect the session for corrupt samples",
                              [&] { return session_features(rec, &filter, config.window, config.kurtosis); });
      },
      config.auth.workers);

  for (std::size_t i = 0; i < sources.size(); ++i) {
    data.sample_counts.push_back({sources[i].user, sources[i].session, samples[i]});
    data.window_counts.push_back({sources[i].user, sources[i].session, parts[i].rows()});
    if (i == 0) {
      data.features = std::move(parts[i]);
    } else {
      data.features.append(parts[i]);
    }
    parts[i] = FeatureMatrix{};
  }
  return data;
}

EvaluationReport run_on_features(const RunConfig& config, PreparedData data, const RunHooks& hooks) {
  config.validate(false);
  auto progress = [&](const std::string& s) {
    if (hooks.progress) hooks.progress(s);
  };
  EvaluationReport report;
  report.started_at = utc_timestamp();
  report.seed = config.seed;
  report.config = config_to_json(config);
  report.config_hash = hex64(config_hash(config));

  if (!data.sample_counts.empty()) {
    report.pre_processing = dataset_stats(group_counts_by_user(data.sample_counts), CountStage::kPreProcessing);
  }
  if (!data.window_counts.empty()) {
    report.post_processing = dataset_stats(group_counts_by_user(data.window_counts), CountStage::kPostProcessing);
  }
  report.window_counts = data.window_counts;

  const DataSplits splits =
      with_stage("split", "the split plan must name sessions present in the data",
                 [&] { return split_sessions(data.features, config.plan); });
  report.split_sizes = {splits.train.rows(), splits.validation.rows(), splits.test.rows()};

  AuthConfig auth = config.auth;
  auth.seed = config.seed;
  progress("authentication");
  const AuthOutcome outcome = with_stage("authenticate", "rerun with keep_going to collect the remaining users",
                                         [&] { return run_authentication(data.features, config.plan, auth); });
  for (ClassifierFamily f : config.auth.classifiers) {
    auto it = outcome.results.find(f);
    report.families.push_back(
        make_family_report(f, it == outcome.results.end() ? std::vector<UserResult>{} : it->second));
  }
  report.failures = outcome.failures;
  if (!outcome.failures.empty()) {
    report.complete = false;
    report.notes.push_back(std::to_string(outcome.failures.size()) +
                           " user(s) failed; aggregates cover the remaining users only");
  }

  if (config.permutation_control) {
    progress("permutation control");
    const FeatureMatrix permuted = permute_user_labels(data.features, derive_seed(config.seed, "control"));
    const AuthOutcome control = with_stage("permutation control", "",
                                           [&] { return run_authentication(permuted, config.plan, auth); });
    for (const auto& [family, rows] : control.results) {
      const auto all = summarize_metrics(rows);
      report.permutation_control[family] = {{"test_accuracy", all.at("test_accuracy")},
                                            {"test_f1", all.at("test_f1")}};
    }
    if (!control.failures.empty()) report.notes.push_back("permutation control had failing users");
  }

  std::vector<FamilyMetrics> metrics;
  for (const auto& f : report.families) {
    FamilyMetrics m;
    m.family = to_string(f.family);
    for (const auto& u : f.users) {
      m.accuracy.push_back(u.test_accuracy);
      m.f1.push_back(u.test_metrics.f1);
    }
    metrics.push_back(std::move(m));
  }
  report.hypotheses = compute_hypotheses(metrics, config.welch);

  if (config.pilot.enabled) {
    for (PilotClassifier c : config.pilot.classifiers) {
      progress(std::string("pilot ") + to_string(c));
      report.pilots.push_back(with_stage("pilot", "pilot needs every user to have at least two windows",
                                         [&] { return run_pilot(data.features, c, config.pilot.config); }));
    }
  }

  if (config.auth.balance_evaluation) {
    report.notes.push_back("validation and test splits are impostor-balanced like the training split");
  }
  report.notes.push_back("KS p-values use the asymptotic Kolmogorov distribution with estimated mean and "
                         "standard deviation; they are biased upward (no Lilliefors correction)");
  report.finished_at = utc_timestamp();
  return report;
}

EvaluationReport run(const RunConfig& config, const RunHooks& hooks) {
  if (hooks.progress) hooks.progress("features");
  PreparedData data = prepare_data(config);
  return run_on_features(config, std::move(data), hooks);
}

std::vector<std::filesystem::path> write_outputs(const EvaluationReport& report, const std::filesystem::path& dir) {
  const nlohmann::json j = report_to_json(report);
  std::vector<std::filesystem::path> files{dir / "report.json"};
  write_json(j, files.front());
  for (auto& p : write_plot_tables(j, dir)) files.push_back(std::move(p));
  return files;
}

}  // namespace neuroauth
