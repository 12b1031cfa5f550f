// neuroauth command-line front end. Every flag overrides the matching field
// of the --config file; validation runs before any data is touched.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "neuroauth/config.hpp"
#include "neuroauth/error.hpp"
#include "neuroauth/ingest.hpp"
#include "neuroauth/pipeline.hpp"
#include "neuroauth/protocol.hpp"
#include "neuroauth/report.hpp"
#include "neuroauth/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neuroauth;

namespace {

struct CommonOptions {
  std::string config;
  std::string manifest;
  bool synthetic{false};
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> low_hz;
  std::optional<double> high_hz;
  std::optional<int> order;
  std::optional<double> window_ms;
  std::optional<std::size_t> window_samples;
  std::optional<std::size_t> hop_samples;
  std::optional<std::string> kurtosis;
};

void add_config_options(CLI::App* cmd, CommonOptions& o, bool data_source) {
  cmd->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  if (data_source) {
    cmd->add_option("--manifest", o.manifest, "dataset manifest; replaces the config data source");
    cmd->add_flag("--synthetic", o.synthetic, "use the synthetic generator (config block or defaults)");
  }
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--workers", o.workers, "worker threads (0: all cores)");
}

void add_dsp_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--low", o.low_hz, "band-pass low edge, Hz");
  cmd->add_option("--high", o.high_hz, "band-pass high edge, Hz");
  cmd->add_option("--order", o.order, "Butterworth prototype order (even)");
  auto* ms = cmd->add_option("--window-ms", o.window_ms, "window length, milliseconds");
  cmd->add_option("--window-samples", o.window_samples, "window length, samples")->excludes(ms);
  cmd->add_option("--hop-samples", o.hop_samples, "hop between window starts, samples");
  cmd->add_option("--kurtosis", o.kurtosis, "excess | raw")->check(CLI::IsMember({"excess", "raw"}));
}

RunConfig resolve_config(const CommonOptions& o, bool require_data) {
  json j = o.config.empty() ? json::object() : read_json(o.config);
  const fs::path base = o.config.empty() ? fs::path{} : fs::path(o.config).parent_path();
  if (!o.manifest.empty()) {
    j["data"] = {{"manifest", fs::absolute(o.manifest).string()}};
  } else if (o.synthetic && !(j.contains("data") && j["data"].contains("synthetic"))) {
    j["data"] = {{"synthetic", json::object()}};
  }
  if (o.seed) j["seed"] = *o.seed;
  if (o.workers) j["workers"] = *o.workers;
  if (o.low_hz) j["bandpass"]["low_hz"] = *o.low_hz;
  if (o.high_hz) j["bandpass"]["high_hz"] = *o.high_hz;
  if (o.order) j["bandpass"]["order"] = *o.order;
  if (o.window_ms) {
    if (j.contains("window")) j["window"].erase("length_samples");
    j["window"]["length_ms"] = *o.window_ms;
  }
  if (o.window_samples) {
    if (j.contains("window")) j["window"].erase("length_ms");
    j["window"]["length_samples"] = *o.window_samples;
  }
  if (o.hop_samples) j["window"]["hop_samples"] = *o.hop_samples;
  if (o.kurtosis) j["kurtosis"] = *o.kurtosis;
  return config_from_json(j, base, require_data);
}

void print_stats(const DatasetStats& s, const char* unit) {
  std::printf("%s (%s, %zu entries)\n", to_string(s.stage), unit, s.entries);
  std::printf("  total    %zu\n  average  %.2f\n  median   %.1f\n  minimum  %zu\n  maximum  %zu\n"
              "  std      %.2f (population)  %.2f (sample)\n",
              s.total, s.average, s.median, s.minimum, s.maximum, s.std_population, s.std_sample);
}

std::vector<SessionCount> manifest_counts(const DatasetManifest& m) {
  std::vector<SessionCount> out;
  for (const auto& e : m.entries) out.push_back({e.user_id, e.session_id, e.sample_count});
  return out;
}

int cmd_synth(const CommonOptions& o, const std::string& out_dir, const SyntheticSpec& flags, bool flags_set) {
  SyntheticSpec spec = flags;
  if (!o.config.empty() && !flags_set) {
    const RunConfig c = resolve_config(o, false);
    if (c.synthetic) spec = *c.synthetic;
  }
  if (o.seed) spec.seed = *o.seed;
  with_stage("synth", "check the generator parameters", [&] { spec.validate(); });
  const auto signatures = derive_signatures(spec);
  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.sample_rate_hz = spec.sample_rate_hz;
  fs::create_directories(out_dir);
  for (int u = 1; u <= spec.n_users; ++u) {
    for (int s = 1; s <= spec.n_sessions; ++s) {
      const SessionRecord rec = generate_session(spec, signatures, u, s);
      const std::string name = session_file_name(u, s);
      write_session_csv(rec, fs::path(out_dir) / name);
      manifest.entries.push_back({u, s, name, rec.n_samples()});
    }
  }
  write_manifest(manifest, fs::path(out_dir) / "manifest.json");
  std::printf("wrote %zu sessions and %s\n", manifest.entries.size(),
              (fs::path(out_dir) / "manifest.json").string().c_str());
  return 0;
}

int cmd_ingest_stats(const CommonOptions& o, const std::string& group) {
  const RunConfig c = resolve_config(o, true);
  const DatasetManifest m = load_manifest(*c.manifest);
  const auto samples = manifest_counts(m);
  std::vector<SessionCount> windows;
  for (const auto& s : samples) windows.push_back({s.user_id, s.session_id, window_count(s.count, c.window)});
  const bool by_user = group == "user";
  print_stats(dataset_stats(by_user ? group_counts_by_user(samples) : samples, CountStage::kPreProcessing),
              by_user ? "samples per user" : "samples per session");
  print_stats(dataset_stats(by_user ? group_counts_by_user(windows) : windows, CountStage::kPostProcessing),
              by_user ? "windows per user" : "windows per session");
  std::size_t split[3] = {0, 0, 0};
  for (const auto& w : windows) {
    auto in = [&](const std::vector<int>& v) { return std::find(v.begin(), v.end(), w.session_id) != v.end(); };
    if (in(c.plan.train)) split[0] += w.count;
    else if (in(c.plan.validation)) split[1] += w.count;
    else if (in(c.plan.test)) split[2] += w.count;
  }
  std::printf("split windows: train %zu  validation %zu  test %zu\n", split[0], split[1], split[2]);
  return 0;
}

int cmd_ingest_validate(const CommonOptions& o) {
  const RunConfig c = resolve_config(o, true);
  const DatasetManifest m = load_manifest(*c.manifest);
  for (const auto& e : m.entries) {
    with_stage("ingest", "re-export the offending session", [&] { load_session(m, e.user_id, e.session_id).validate(); });
  }
  std::printf("%zu sessions valid\n", m.entries.size());
  return 0;
}

int cmd_preprocess(const CommonOptions& o, const std::string& out_dir) {
  const RunConfig c = resolve_config(o, true);
  if (!c.manifest) throw Error(ErrorKind::kInvalidArgument, "preprocess needs --manifest");
  const DatasetManifest m = load_manifest(*c.manifest);
  BandpassSpec band = c.bandpass;
  band.sample_rate_hz = m.sample_rate_hz;
  band.validate();
  const FilterRealization filter = design_bandpass(band);
  DatasetManifest out = m;
  out.root = out_dir;
  fs::create_directories(out_dir);
  std::vector<SessionCount> windows;
  for (auto& e : out.entries) {
    const SessionRecord rec = with_stage("ingest", "", [&] { return load_session(m, e.user_id, e.session_id); });
    const SessionRecord filtered = with_stage("preprocess", "inspect the session for corrupt samples",
                                              [&] { return apply_filter(filter, rec); });
    e.path = session_file_name(e.user_id, e.session_id);
    write_session_csv(filtered, fs::path(out_dir) / e.path);
    windows.push_back({e.user_id, e.session_id, window_count(rec.n_samples(), c.window)});
  }
  write_manifest(out, fs::path(out_dir) / "manifest.json");
  print_stats(dataset_stats(group_counts_by_user(windows), CountStage::kPostProcessing), "windows per user");
  return 0;
}

int cmd_features(const CommonOptions& o, const std::string& in, const std::string& out_dir, bool filter_first) {
  CommonOptions with_in = o;
  with_in.manifest = in;
  RunConfig c = resolve_config(with_in, true);
  FeatureMatrix fm;
  if (filter_first) {
    fm = prepare_data(c).features;
  } else {
    const DatasetManifest m = load_manifest(*c.manifest);
    for (const auto& e : m.entries) {
      const SessionRecord rec = with_stage("ingest", "", [&] { return load_session(m, e.user_id, e.session_id); });
      fm.append(session_features(rec, nullptr, c.window, c.kurtosis));
    }
  }
  write_feature_matrix(fm, out_dir);
  std::printf("%zu windows x %zu features -> %s\n", fm.rows(), fm.cols(), out_dir.c_str());
  return 0;
}

FeatureMatrix load_or_prepare(const CommonOptions& o, const std::string& features_dir, RunConfig& c) {
  if (!features_dir.empty()) {
    c = resolve_config(o, false);
    return with_stage("features", "run `neuroauth features` first", [&] { return read_feature_matrix(features_dir); });
  }
  c = resolve_config(o, true);
  return prepare_data(c).features;
}

struct UserTask {
  LabeledSet train;
  LabeledSet validation;
  LabeledSet test;
};

UserTask user_task(const FeatureMatrix& fm, const RunConfig& c, int user) {
  const DataSplits splits = with_stage("split", "", [&] { return split_sessions(fm, c.plan); });
  const AuthTask task = make_auth_task(splits, user);
  if (task.train.labels.empty() ||
      std::find(task.train.labels.begin(), task.train.labels.end(), 1) == task.train.labels.end()) {
    throw Error(ErrorKind::kUnknownSession, "user " + std::to_string(user) + " has no training rows");
  }
  const UserSeeds seeds = user_seeds(c.seed, user);
  UserTask t;
  t.train = balance_set(task.train, user, seeds.train_balance);
  t.validation = c.auth.balance_evaluation ? balance_set(task.validation, user, seeds.eval_balance_val) : task.validation;
  t.test = c.auth.balance_evaluation ? balance_set(task.test, user, seeds.eval_balance_test) : task.test;
  return t;
}

int cmd_select(const CommonOptions& o, const std::string& features_dir, int user, const std::string& family,
               const std::string& out) {
  RunConfig c;
  const FeatureMatrix fm = load_or_prepare(o, features_dir, c);
  const UserTask t = user_task(fm, c, user);
  c.auth.classifiers = {parse_family(family)};
  const UserFit fit = fit_user(user, t.train, t.validation, c.auth);
  const FamilyFit& ff = fit.families.front();

  std::vector<std::size_t> order(fit.importance.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fit.importance[a] > fit.importance[b]; });
  std::printf("user %d: top features by importance\n", user);
  for (std::size_t r = 0; r < std::min<std::size_t>(10, order.size()); ++r) {
    std::printf("  %-14s %.6f\n", fm.column_names[order[r]].c_str(), fit.importance[order[r]]);
  }
  std::printf("threshold trials (%s default cell, validation accuracy)\n", family.c_str());
  for (const auto& tr : ff.threshold.trials) {
    std::printf("  %.6f  %3zu features  %s\n", tr.threshold, tr.n_selected,
                tr.evaluated ? std::to_string(tr.score).c_str() : "skipped (empty mask)");
  }
  std::printf("chosen threshold %.6f, %zu features\n", ff.threshold.threshold, ff.threshold.mask.size());
  if (!out.empty()) {
    json trials = json::array();
    for (const auto& tr : ff.threshold.trials) {
      trials.push_back({{"threshold", tr.threshold}, {"n_selected", tr.n_selected}, {"val_accuracy", tr.score},
                        {"evaluated", tr.evaluated}});
    }
    write_json({{"user_id", user}, {"seed", c.seed}, {"importance", fit.importance}, {"columns", fm.column_names},
                {"threshold", ff.threshold.threshold}, {"selected_indices", ff.threshold.mask.indices},
                {"trials", trials}},
               out);
  }
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& features_dir, int user, const std::string& family,
              const std::string& grid_path, const std::string& out) {
  RunConfig c;
  const FeatureMatrix fm = load_or_prepare(o, features_dir, c);
  const ClassifierFamily f = parse_family(family);
  c.auth.classifiers = {f};
  if (!grid_path.empty()) c.auth.grids[f] = grid_from_json(read_json(grid_path), f);
  const UserTask t = user_task(fm, c, user);
  const UserFit fit = fit_user(user, t.train, t.validation, c.auth);
  const FamilyFit& ff = fit.families.front();
  for (const auto& cell : ff.grid.cells) {
    std::printf("  %-40s %s\n", describe(cell.spec).c_str(),
                cell.trained ? ("val " + std::to_string(cell.val_accuracy) + (cell.converged ? "" : " (not converged)")).c_str()
                             : ("failed: " + cell.error).c_str());
  }
  const FeatureMatrix test = fit.normalizer.apply(t.test.features);
  const auto pred = predict(ff.grid.model, test.values.select_cols(ff.threshold.mask.indices));
  const ConfusionMatrix cm = confusion(pred, t.test.labels);
  const Metrics m = metrics(cm);
  std::printf("user %d %s: best %s, %zu features, val %.4f, test accuracy %.4f, F1 %.4f "
              "(tp %zu fp %zu fn %zu tn %zu)\n",
              user, family.c_str(), describe(ff.grid.best_spec).c_str(), ff.threshold.mask.size(),
              ff.grid.val_accuracy, m.accuracy, m.f1, cm.tp, cm.fp, cm.fn, cm.tn);
  if (!out.empty()) {
    write_json({{"user_id", user},
                {"seed", c.seed},
                {"family", family},
                {"selected_indices", ff.threshold.mask.indices},
                {"normalizer", {{"minimum", fit.normalizer.minimum}, {"maximum", fit.normalizer.maximum}}},
                {"model", model_to_json(ff.grid.model)}},
               out);
  }
  return 0;
}

int cmd_auth(const CommonOptions& o, const std::string& out, bool keep_going, bool control, bool pilot,
             const std::vector<std::string>& classifiers) {
  if (o.config.empty() && o.manifest.empty() && !o.synthetic) {
    throw Error(ErrorKind::kInvalidArgument, "auth needs --config, --manifest or --synthetic");
  }
  RunConfig c = resolve_config(o, true);
  if (keep_going) c.auth.keep_going = true;
  if (control) c.permutation_control = true;
  if (pilot) c.pilot.enabled = true;
  if (!classifiers.empty()) {
    c.auth.classifiers.clear();
    for (const auto& name : classifiers) c.auth.classifiers.push_back(parse_family(name));
  }
  c.validate();
  RunHooks hooks;
  hooks.progress = [](const std::string& s) { std::fprintf(stderr, "[neuroauth] %s\n", s.c_str()); };
  const EvaluationReport report = run(c, hooks);
  const json j = report_to_json(report);
  write_json(j, out);
  const fs::path dir = fs::path(out).has_parent_path() ? fs::path(out).parent_path() : fs::path(".");
  write_plot_tables(j, dir);
  std::cout << format_report_table(j);
  std::printf("report: %s%s\n", out.c_str(), report.complete ? "" : " (incomplete)");
  return report.complete ? 0 : 3;
}

int cmd_pilot(const CommonOptions& o, const std::string& features_dir, const std::string& which,
              const std::string& out_dir, std::optional<double> fraction, bool shuffled) {
  RunConfig c;
  const FeatureMatrix fm = load_or_prepare(o, features_dir, c);
  PilotConfig pc = c.pilot.config;
  if (fraction) pc.train_fraction = *fraction;
  if (shuffled) pc.chronological = false;
  const PilotClassifier k = which == "lda" ? PilotClassifier::kLda : PilotClassifier::kSvm;
  const PilotReport r = with_stage("pilot", "", [&] { return run_pilot(fm, k, pc); });
  std::printf("pilot %s: accuracy %.4f on %zu test rows (%zu train)\n", which.c_str(), r.accuracy, r.test_rows,
              r.train_rows);
  std::printf("%6s", "true");
  for (int cl : r.classes) std::printf(" %6d", cl);
  std::printf("\n");
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    std::printf("%6d", r.classes[i]);
    for (std::size_t v : r.confusion[i]) std::printf(" %6zu", v);
    std::printf("\n");
  }
  if (!out_dir.empty()) {
    json j = {{"families", json::array()}, {"pilot", json::array({to_json(r)})}};
    write_json({{"seed", c.seed}, {"pilot", to_json(r)}}, fs::path(out_dir) / ("pilot_" + which + ".json"));
    write_plot_tables(j, out_dir);
  }
  return 0;
}

int cmd_stats(const std::string& report_path, bool welch, const std::string& out) {
  json j = read_json(report_path);
  const auto families = metrics_from_report(j);
  const HypothesisBlock h = compute_hypotheses(families, welch);
  j["hypotheses"] = to_json(h);
  write_json(j, out.empty() ? fs::path(report_path) : fs::path(out));
  for (const auto* block : {&h.normality, &h.t_tests}) {
    for (const auto& e : *block) {
      if (!e.error.empty()) {
        std::printf("%-44s %s\n", e.result.name.c_str(), e.error.c_str());
      } else {
        std::printf("%-44s statistic %9.5f  p %.5f  %s\n", e.result.name.c_str(), e.result.statistic,
                    e.result.p_value, e.result.reject_null ? "reject H0" : "retain H0");
      }
    }
  }
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir) {
  const json j = read_json(report_path);
  std::cout << format_report_table(j);
  if (!out_dir.empty()) {
    for (const auto& p : write_plot_tables(j, out_dir)) std::printf("wrote %s\n", p.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG biometric authentication pipeline"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset (CSV sessions + manifest)");
  std::string synth_out;
  SyntheticSpec synth_spec;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--config", o.config, "take the synthetic block from this config")->check(CLI::ExistingFile);
  auto* u_opt = synth->add_option("--users", synth_spec.n_users);
  auto* s_opt = synth->add_option("--sessions", synth_spec.n_sessions);
  auto* sec_opt = synth->add_option("--seconds", synth_spec.session_seconds);
  auto* fs_opt = synth->add_option("--fs", synth_spec.sample_rate_hz);
  auto* d_opt = synth->add_option("--drift", synth_spec.session_drift);
  auto* sp_opt = synth->add_option("--spread", synth_spec.signature_spread);
  synth->add_option("--seed", o.seed);

  auto* ingest = app.add_subcommand("ingest", "inspect a dataset manifest");
  ingest->require_subcommand(1);
  add_config_options(ingest, o, true);
  add_dsp_options(ingest, o);
  auto* ingest_stats = ingest->add_subcommand("stats", "sample and window counts (per user by default)");
  std::string group = "user";
  ingest_stats->add_option("--group", group)->check(CLI::IsMember({"user", "session"}));
  auto* ingest_validate = ingest->add_subcommand("validate", "load and check every session");

  auto* pre = app.add_subcommand("preprocess", "band-pass filter every session");
  std::string pre_out;
  add_config_options(pre, o, true);
  add_dsp_options(pre, o);
  pre->add_option("--out", pre_out, "output directory for filtered sessions")->required();

  auto* feat = app.add_subcommand("features", "window sessions and extract features");
  std::string feat_in, feat_out;
  bool feat_filter = false;
  add_config_options(feat, o, false);
  add_dsp_options(feat, o);
  feat->add_option("--in", feat_in, "manifest of (filtered) sessions")->required();
  feat->add_option("--out", feat_out, "feature matrix directory")->required();
  feat->add_flag("--filter", feat_filter, "band-pass filter before windowing");

  auto* sel = app.add_subcommand("select", "feature importances and threshold tuning for one user");
  std::string features_dir, family = "nlsvm", out_file;
  int user = 1;
  add_config_options(sel, o, true);
  add_dsp_options(sel, o);
  sel->add_option("--features", features_dir, "feature matrix directory");
  sel->add_option("--user", user)->required();
  sel->add_option("--classifier", family)->check(CLI::IsMember({"knn", "lda", "lsvm", "nlsvm"}));
  sel->add_option("--out", out_file, "write importances and threshold trials (JSON)");

  auto* train = app.add_subcommand("train", "grid-search one classifier for one user");
  std::string grid_path;
  add_config_options(train, o, true);
  add_dsp_options(train, o);
  train->add_option("--features", features_dir, "feature matrix directory");
  train->add_option("--user", user)->required();
  train->add_option("--classifier", family)->required()->check(CLI::IsMember({"knn", "lda", "lsvm", "nlsvm"}));
  train->add_option("--grid", grid_path, "grid (JSON array of cells or object of lists)")->check(CLI::ExistingFile);
  train->add_option("--out", out_file, "write the fitted model (JSON)");

  auto* auth = app.add_subcommand("auth", "full one-vs-rest authentication experiment");
  std::string report_out = "report.json";
  bool keep_going = false, control = false, with_pilot = false;
  std::vector<std::string> classifiers;
  add_config_options(auth, o, true);
  add_dsp_options(auth, o);
  auth->add_option("--out", report_out, "report path; plot tables go next to it");
  auth->add_flag("--keep-going", keep_going, "record failing users and continue");
  auth->add_flag("--permutation-control", control, "also run the label-permuted control");
  auth->add_flag("--pilot", with_pilot, "also run the multi-class pilot");
  auth->add_option("--classifiers", classifiers, "families to evaluate (knn lda lsvm nlsvm)");

  auto* pilot = app.add_subcommand("pilot", "multi-class identification pilot");
  std::string pilot_kind = "lda", pilot_out;
  std::optional<double> fraction;
  bool shuffled = false;
  add_config_options(pilot, o, true);
  add_dsp_options(pilot, o);
  pilot->add_option("--features", features_dir, "feature matrix directory");
  pilot->add_option("--classifier", pilot_kind)->check(CLI::IsMember({"lda", "svm"}));
  pilot->add_option("--train-fraction", fraction);
  pilot->add_flag("--shuffle", shuffled, "seeded shuffle instead of the chronological split");
  pilot->add_option("--out", pilot_out, "directory for the pilot JSON and confusion table");

  auto* stats = app.add_subcommand("stats", "append the hypothesis-test block to a report");
  std::string report_in, stats_out;
  bool welch = false;
  stats->add_option("--report", report_in)->required()->check(CLI::ExistingFile);
  stats->add_flag("--welch", welch, "Welch instead of pooled-variance t tests");
  stats->add_option("--out", stats_out, "write here instead of updating the report in place");

  auto* rep = app.add_subcommand("report", "print a report and emit its plot tables");
  std::string rep_out;
  rep->add_option("--report", report_in)->required()->check(CLI::ExistingFile);
  rep->add_option("--out", rep_out, "directory for plot tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const bool flags_set = u_opt->count() || s_opt->count() || sec_opt->count() || fs_opt->count() ||
                             d_opt->count() || sp_opt->count();
      return cmd_synth(o, synth_out, synth_spec, flags_set);
    }
    if (*ingest) {
      if (o.manifest.empty() && o.config.empty()) throw Error(ErrorKind::kInvalidArgument, "ingest needs --manifest");
      if (*ingest_stats) return cmd_ingest_stats(o, group);
      if (*ingest_validate) return cmd_ingest_validate(o);
    }
    if (*pre) return cmd_preprocess(o, pre_out);
    if (*feat) return cmd_features(o, feat_in, feat_out, feat_filter);
    if (*sel) return cmd_select(o, features_dir, user, family, out_file);
    if (*train) return cmd_train(o, features_dir, user, family, grid_path, out_file);
    if (*auth) return cmd_auth(o, report_out, keep_going, control, with_pilot, classifiers);
    if (*pilot) return cmd_pilot(o, features_dir, pilot_kind, pilot_out, fraction, shuffled);
    if (*stats) return cmd_stats(report_in, welch, stats_out);
    if (*rep) return cmd_report(report_in, rep_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "neuroauth: %s error: %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "neuroauth: %s\n", e.what());
    return 3;
  }
  return 1;
}
