#include "neuroauth/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <map>
#include <set>
#include <tuple>
#include <string>

#include "neuroauth/error.hpp"
#include "neuroauth/parallel.hpp"
#include "neuroauth/random.hpp"

namespace neuroauth {

namespace {

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> distinct_users(const FeatureMatrix& fm) {
  std::set<int> users;
  for (const auto& m : fm.meta) users.insert(m.user_id);
  return {users.begin(), users.end()};
}

LabeledSet label_for(const FeatureMatrix& fm, int genuine_user) {
  LabeledSet set;
  set.features = fm;
  set.labels.reserve(fm.rows());
  for (const auto& m : fm.meta) set.labels.push_back(m.user_id == genuine_user ? 1 : 0);
  return set;
}

}  // namespace

void SplitPlan::validate() const {
  if (train.empty() || validation.empty() || test.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "split plan: train, validation and test must be non-empty");
  }
  const std::vector<const std::vector<int>*> parts{&train, &validation, &test};
  const char* names[] = {"train", "validation", "test"};
  for (std::size_t a = 0; a < parts.size(); ++a) {
    std::set<int> seen;
    for (int s : *parts[a]) {
      if (!seen.insert(s).second) {
        throw Error(ErrorKind::kInvalidConfig,
                    std::string("split plan: session ") + std::to_string(s) + " repeated in " + names[a]);
      }
    }
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      for (int s : *parts[a]) {
        if (contains(*parts[b], s)) {
          throw Error(ErrorKind::kInvalidConfig, std::string("split plan: session ") + std::to_string(s) +
                                                     " is in both " + names[a] + " and " + names[b]);
        }
      }
    }
  }
}

DataSplits partition_rows(const FeatureMatrix& fm, const SplitPlan& plan) {
  plan.validate();
  std::vector<std::size_t> tr, va, te;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    const int s = fm.meta[i].session_id;
    if (contains(plan.train, s)) {
      tr.push_back(i);
    } else if (contains(plan.validation, s)) {
      va.push_back(i);
    } else if (contains(plan.test, s)) {
      te.push_back(i);
    }
  }
  return {fm.select_rows(tr), fm.select_rows(va), fm.select_rows(te)};
}

DataSplits split_sessions(const FeatureMatrix& fm, const SplitPlan& plan) {
  plan.validate();
  std::set<int> present;
  for (const auto& m : fm.meta) present.insert(m.session_id);
  std::vector<int> missing;
  for (const auto* part : {&plan.train, &plan.validation, &plan.test}) {
    for (int s : *part) {
      if (!present.count(s)) missing.push_back(s);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kUnknownSession,
                "split plan names session(s) " + join(missing) + " absent from the data");
  }
  return partition_rows(fm, plan);
}

AuthTask make_auth_task(const DataSplits& splits, int genuine_user) {
  AuthTask task;
  task.genuine_user = genuine_user;
  for (int u : distinct_users(splits.train)) {
    if (u != genuine_user) task.impostors.push_back(u);
  }
  task.train = label_for(splits.train, genuine_user);
  task.validation = label_for(splits.validation, genuine_user);
  task.test = label_for(splits.test, genuine_user);
  return task;
}

LabeledSet balance_set(const LabeledSet& set, int genuine_user, std::uint64_t seed,
                       BalanceReport* report) {
  std::vector<std::size_t> genuine;
  std::map<int, std::vector<std::size_t>> by_impostor;
  for (std::size_t i = 0; i < set.features.rows(); ++i) {
    const int u = set.features.meta[i].user_id;
    if (u == genuine_user) {
      genuine.push_back(i);
    } else {
      by_impostor[u].push_back(i);
    }
  }
  BalanceReport r;
  r.genuine_rows = genuine.size();
  r.impostor_count = by_impostor.size();
  std::vector<std::size_t> keep = genuine;
  if (!by_impostor.empty()) {
    if (genuine.size() < by_impostor.size()) {
      throw Error(ErrorKind::kDegenerate,
                  "balance: user " + std::to_string(genuine_user) + " has " + std::to_string(genuine.size()) +
                      " genuine rows, fewer than the " + std::to_string(by_impostor.size()) + " impostors");
    }
    r.per_impostor_quota = genuine.size() / by_impostor.size();
    for (const auto& [u, rows] : by_impostor) {
      if (rows.size() <= r.per_impostor_quota) {
        if (rows.size() < r.per_impostor_quota) r.short_impostors.push_back(u);
        keep.insert(keep.end(), rows.begin(), rows.end());
        continue;
      }
      Rng rng(derive_seed(seed, "balance", {static_cast<std::uint64_t>(u)}));
      for (std::size_t k : rng.sample_without_replacement(rows.size(), r.per_impostor_quota)) {
        keep.push_back(rows[k]);
      }
    }
  }
  std::sort(keep.begin(), keep.end());
  r.impostor_rows = keep.size() - genuine.size();
  if (report) *report = r;
  LabeledSet out;
  out.features = set.features.select_rows(keep);
  out.labels.reserve(keep.size());
  for (std::size_t i : keep) out.labels.push_back(set.labels[i]);
  return out;
}

AuthTask balance_downsample(const AuthTask& task, std::uint64_t seed, BalanceReport* report) {
  AuthTask out = task;
  out.train = balance_set(task.train, task.genuine_user, seed, report);
  return out;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::kInvalidArgument, "confusion: prediction and truth lengths differ");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool t = truth[i] == 1;
    if (p && t) {
      ++cm.tp;
    } else if (p) {
      ++cm.fp;
    } else if (t) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  Metrics m;
  m.accuracy = ratio(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
  m.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  m.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  m.f1 = ratio(2.0 * static_cast<double>(cm.tp), static_cast<double>(2 * cm.tp + cm.fp + cm.fn));
  return m;
}

std::vector<ClassifierSpec> AuthConfig::grid_for(ClassifierFamily f) const {
  auto it = grids.find(f);
  return it != grids.end() ? it->second : default_grid(f);
}

ClassifierSpec AuthConfig::tuning_cell_for(ClassifierFamily f) const {
  auto it = tuning_cells.find(f);
  return it != tuning_cells.end() ? it->second : default_cell(f);
}

UserSeeds user_seeds(std::uint64_t global_seed, int user_id) {
  const auto u = static_cast<std::uint64_t>(user_id);
  return {derive_seed(global_seed, "balance-train", {u}), derive_seed(global_seed, "balance-val", {u}),
          derive_seed(global_seed, "balance-test", {u}), derive_seed(global_seed, "extra-trees", {u})};
}

UserFit fit_user(int genuine_user, const LabeledSet& balanced_train, const LabeledSet& validation,
                 const AuthConfig& config) {
  if (balanced_train.features.rows() < 2) {
    throw Error(ErrorKind::kEmptyInput, "user " + std::to_string(genuine_user) + ": training split is empty");
  }
  if (validation.features.rows() == 0) {
    throw Error(ErrorKind::kEmptyInput, "user " + std::to_string(genuine_user) + ": validation split is empty");
  }
  UserFit fit;
  fit.user_id = genuine_user;
  fit.normalizer = fit_normalizer(balanced_train.features);
  const FeatureMatrix train = fit.normalizer.apply(balanced_train.features);
  const FeatureMatrix val = fit.normalizer.apply(validation.features);

  ExtraTreesSpec trees = config.trees;
  trees.seed = user_seeds(config.seed, genuine_user).trees;
  fit.importance = fit_importance(train.values, balanced_train.labels, trees);

  const double d = static_cast<double>(train.cols());
  std::vector<double> candidates;
  for (double m : config.threshold_multipliers) candidates.push_back(m / d);

  for (ClassifierFamily family : config.classifiers) {
    FamilyFit ff;
    ff.family = family;
    const ClassifierSpec cell = config.tuning_cell_for(family);
    ff.threshold = tune_threshold(fit.importance, candidates, [&](const SelectionMask& mask) {
      const Matrix tr = train.values.select_cols(mask.indices);
      const Matrix va = val.values.select_cols(mask.indices);
      const TrainedClassifier model = train_classifier(cell, tr, balanced_train.labels);
      return accuracy(predict(model, va), validation.labels);
    });
    const auto& cols = ff.threshold.mask.indices;
    const std::vector<ClassifierSpec> grid = config.grid_for(family);
    ff.grid = grid_search(train.values.select_cols(cols), balanced_train.labels, val.values.select_cols(cols),
                          validation.labels, grid);
    fit.families.push_back(std::move(ff));
  }
  return fit;
}

AuthOutcome run_authentication(const FeatureMatrix& fm, const SplitPlan& plan, const AuthConfig& config) {
  if (config.classifiers.empty()) throw Error(ErrorKind::kInvalidConfig, "no classifier families requested");
  const DataSplits splits = split_sessions(fm, plan);
  const std::vector<int> users = distinct_users(splits.train);
  if (users.size() < 2) {
    throw Error(ErrorKind::kSingleClass, "authentication needs at least two users in the training split");
  }

  std::vector<std::optional<UserFit>> fits(users.size());
  std::vector<std::vector<UserResult>> per_user(users.size());
  std::vector<std::optional<UserFailure>> failures(users.size());
  parallel_for(
      users.size(),
      [&](std::size_t ui) {
        const int u = users[ui];
        try {
          const UserSeeds seeds = user_seeds(config.seed, u);
          const AuthTask task = make_auth_task(splits, u);
          UserFit fit;
          const LabeledSet train = balance_set(task.train, u, seeds.train_balance, &fit.balance);
          const LabeledSet val = config.balance_evaluation
                                     ? balance_set(task.validation, u, seeds.eval_balance_val)
                                     : task.validation;
          const LabeledSet test =
              config.balance_evaluation ? balance_set(task.test, u, seeds.eval_balance_test) : task.test;
          if (test.features.rows() == 0) {
            throw Error(ErrorKind::kEmptyInput, "test split is empty");
          }
          const BalanceReport balance = fit.balance;
          fit = fit_user(u, train, val, config);
          fit.balance = balance;

          const FeatureMatrix test_norm = fit.normalizer.apply(test.features);
          for (const FamilyFit& ff : fit.families) {
            UserResult r;
            r.user_id = u;
            r.family = ff.family;
            r.best_spec = ff.grid.best_spec;
            r.threshold = ff.threshold.threshold;
            r.selected_indices = ff.threshold.mask.indices;
            r.selected_features = r.selected_indices.size();
            r.threshold_trials = ff.threshold.trials;
            r.grid = ff.grid.cells;
            r.val_accuracy = ff.grid.val_accuracy;
            r.converged = ff.grid.cells[ff.grid.best_index].converged;
            const std::vector<int> pred = predict(ff.grid.model, test_norm.values.select_cols(r.selected_indices));
            r.test_confusion = confusion(pred, test.labels);
            r.test_metrics = metrics(r.test_confusion);
            r.test_accuracy = r.test_metrics.accuracy;
            r.train_rows = train.features.rows();
            r.val_rows = val.features.rows();
            r.test_rows = test.features.rows();
            per_user[ui].push_back(std::move(r));
          }
          fits[ui] = std::move(fit);
        } catch (const Error& e) {
          if (!config.keep_going) throw Error(e.kind(), "user " + std::to_string(u) + ": " + e.what());
          per_user[ui].clear();
          failures[ui] = UserFailure{u, e.kind(), e.what()};
        }
      },
      config.workers);

  AuthOutcome out;
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    if (failures[ui]) {
      out.failures.push_back(*failures[ui]);
      continue;
    }
    out.fits.push_back(std::move(*fits[ui]));
    for (auto& r : per_user[ui]) out.results[r.family].push_back(std::move(r));
  }
  return out;
}

FeatureMatrix permute_user_labels(const FeatureMatrix& fm, std::uint64_t seed) {
  FeatureMatrix out = fm;
  std::vector<int> ids;
  ids.reserve(fm.rows());
  for (const auto& m : fm.meta) ids.push_back(m.user_id);
  Rng rng(derive_seed(seed, "permute-labels"));
  rng.shuffle(ids);
  for (std::size_t i = 0; i < ids.size(); ++i) out.meta[i].user_id = ids[i];
  return out;
}

const char* to_string(PilotClassifier c) { return c == PilotClassifier::kLda ? "lda" : "svm"; }

PilotReport run_pilot(const FeatureMatrix& fm, PilotClassifier classifier, const PilotConfig& config) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "pilot: train fraction must lie in (0, 1)");
  }
  const std::vector<int> users = distinct_users(fm);
  if (users.size() < 2) throw Error(ErrorKind::kSingleClass, "pilot: needs at least two users");

  std::vector<std::size_t> train_idx, test_idx;
  for (int u : users) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
      if (fm.meta[i].user_id == u) rows.push_back(i);
    }
    if (config.chronological) {
      std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        const auto& ma = fm.meta[a];
        const auto& mb = fm.meta[b];
        return std::tie(ma.session_id, ma.window_index) < std::tie(mb.session_id, mb.window_index);
      });
    } else {
      Rng rng(derive_seed(config.seed, "pilot-split", {static_cast<std::uint64_t>(u)}));
      rng.shuffle(rows);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(rows.size())));
    if (n_train == 0 || n_train == rows.size()) {
      throw Error(ErrorKind::kEmptyInput, "pilot: user " + std::to_string(u) + " has too few rows to split");
    }
    train_idx.insert(train_idx.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const FeatureMatrix train_raw = fm.select_rows(train_idx);
  const Normalizer norm = fit_normalizer(train_raw);
  const FeatureMatrix train = norm.apply(train_raw);
  const FeatureMatrix test = norm.apply(fm.select_rows(test_idx));
  auto labels_of = [](const FeatureMatrix& m) {
    std::vector<int> y;
    y.reserve(m.rows());
    for (const auto& r : m.meta) y.push_back(r.user_id);
    return y;
  };
  const std::vector<int> y_train = labels_of(train);
  const std::vector<int> y_test = labels_of(test);

  PilotReport rep;
  rep.classifier = classifier;
  rep.classes = users;
  rep.train_rows = train.rows();
  rep.test_rows = test.rows();
  std::vector<int> pred;
  if (classifier == PilotClassifier::kLda) {
    const LdaModel model = train_lda(train.values, y_train);
    rep.projection_dims = model.scalings.cols();
    pred = model.predict(test.values);
  } else {
    SvmSpec spec;
    spec.kernel = KernelType::kRbf;
    spec.C = config.svm_C;
    spec.gamma_mode = GammaMode::kScale;
    pred = train_multiclass_svm(train.values, y_train, spec).predict(test.values);
  }
  std::map<int, std::size_t> pos;
  for (std::size_t k = 0; k < users.size(); ++k) pos[users[k]] = k;
  rep.confusion.assign(users.size(), std::vector<std::size_t>(users.size(), 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++rep.confusion[pos.at(y_test[i])][pos.at(pred[i])];
    if (pred[i] == y_test[i]) ++correct;
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  return rep;
}

}  // namespace neuroauth
