#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "neuroauth/classifier.hpp"
#include "neuroauth/error.hpp"
#include "neuroauth/featsel.hpp"
#include "neuroauth/features.hpp"
#include "neuroauth/stats.hpp"

namespace neuroauth {

struct SplitPlan {
  std::vector<int> train{1, 2, 3, 4, 5};
  std::vector<int> validation{6, 7};
  std::vector<int> test{8, 9};

  // Pairwise disjoint and non-empty.
  void validate() const;
};

struct DataSplits {
  FeatureMatrix train;
  FeatureMatrix validation;
  FeatureMatrix test;
};

// Routes rows by session id, preserving order; rows of sessions outside the
// plan are dropped.
DataSplits partition_rows(const FeatureMatrix& fm, const SplitPlan& plan);
// partition_rows plus a check that every plan session occurs in the data.
DataSplits split_sessions(const FeatureMatrix& fm, const SplitPlan& plan);

struct LabeledSet {
  FeatureMatrix features;
  std::vector<int> labels;  // 1 genuine, 0 impostor
};

struct AuthTask {
  int genuine_user{0};
  std::vector<int> impostors;
  LabeledSet train;
  LabeledSet validation;
  LabeledSet test;
};

AuthTask make_auth_task(const DataSplits& splits, int genuine_user);

struct BalanceReport {
  std::size_t genuine_rows{0};
  std::size_t impostor_count{0};
  std::size_t per_impostor_quota{0};
  std::size_t impostor_rows{0};
  std::vector<int> short_impostors;  // contributed fewer than the quota
};

// Each impostor keeps q = floor(G / m) rows sampled without replacement
// (seeded per impostor); genuine rows and row order are preserved.
LabeledSet balance_set(const LabeledSet& set, int genuine_user, std::uint64_t seed,
                       BalanceReport* report = nullptr);

// Balances the training split only.
AuthTask balance_downsample(const AuthTask& task, std::uint64_t seed,
                            BalanceReport* report = nullptr);

struct ConfusionMatrix {
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t fn{0};
  std::size_t tn{0};

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

struct Metrics {
  double accuracy{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
};

// Any 0/0 ratio is defined as 0.
Metrics metrics(const ConfusionMatrix& cm);

struct AuthConfig {
  ExtraTreesSpec trees;
  // Threshold candidates as multiples of 1 / (feature count).
  std::vector<double> threshold_multipliers{0.5, 0.75, 1.0, 1.25, 1.5};
  std::vector<ClassifierFamily> classifiers{ClassifierFamily::kLinearSvm, ClassifierFamily::kRbfSvm};
  std::map<ClassifierFamily, std::vector<ClassifierSpec>> grids;  // default_grid when absent
  std::map<ClassifierFamily, ClassifierSpec> tuning_cells;        // default_cell when absent
  // Downsample impostors in validation and test the same way as in training.
  bool balance_evaluation{true};
  std::uint64_t seed{0};
  int workers{0};  // 0: OpenMP default
  // Record per-user failures and continue instead of aborting the run.
  bool keep_going{false};

  std::vector<ClassifierSpec> grid_for(ClassifierFamily f) const;
  ClassifierSpec tuning_cell_for(ClassifierFamily f) const;
};

struct FamilyFit {
  ClassifierFamily family{ClassifierFamily::kRbfSvm};
  ThresholdChoice threshold;
  GridSearchResult grid;
};

// Everything fitted from train + validation rows for one genuine user.
struct UserFit {
  int user_id{0};
  BalanceReport balance;
  Normalizer normalizer;
  ImportanceVector importance;
  std::vector<FamilyFit> families;  // AuthConfig::classifiers order
};

struct UserResult {
  int user_id{0};
  ClassifierFamily family{ClassifierFamily::kRbfSvm};
  ClassifierSpec best_spec;
  double threshold{0.0};
  std::size_t selected_features{0};
  std::vector<std::size_t> selected_indices;
  std::vector<ThresholdTrial> threshold_trials;
  std::vector<GridCellResult> grid;
  double val_accuracy{0.0};
  double test_accuracy{0.0};
  Metrics test_metrics;
  ConfusionMatrix test_confusion;
  std::size_t train_rows{0};
  std::size_t val_rows{0};
  std::size_t test_rows{0};
  bool converged{true};
};

// Fits normalizer, importances, thresholds and classifier grids for one user.
// Takes only the train and validation splits.
UserFit fit_user(int genuine_user, const LabeledSet& balanced_train, const LabeledSet& validation,
                 const AuthConfig& config);

struct UserSeeds {
  std::uint64_t train_balance;
  std::uint64_t eval_balance_val;
  std::uint64_t eval_balance_test;
  std::uint64_t trees;
};
UserSeeds user_seeds(std::uint64_t global_seed, int user_id);

struct UserFailure {
  int user_id{0};
  ErrorKind kind{ErrorKind::kStageFailure};
  std::string message;
};

struct AuthOutcome {
  std::vector<UserFit> fits;  // ascending user id, successful users only
  std::map<ClassifierFamily, std::vector<UserResult>> results;
  std::vector<UserFailure> failures;  // keep_going only
};

// One-vs-rest authentication of every user against all others.
AuthOutcome run_authentication(const FeatureMatrix& fm, const SplitPlan& plan,
                               const AuthConfig& config);

// Copy of fm whose user ids are shuffled across rows (label-permutation control).
FeatureMatrix permute_user_labels(const FeatureMatrix& fm, std::uint64_t seed);

enum class PilotClassifier { kLda, kSvm };

struct PilotConfig {
  double train_fraction{0.8};
  bool chronological{true};
  std::uint64_t seed{0};
  double svm_C{0.1};
};

struct PilotReport {
  PilotClassifier classifier{PilotClassifier::kLda};
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double accuracy{0.0};
  std::size_t train_rows{0};
  std::size_t test_rows{0};
  std::size_t projection_dims{0};  // LDA only
};

// Multi-class user identification with a per-user train/test row split.
PilotReport run_pilot(const FeatureMatrix& fm, PilotClassifier classifier,
                      const PilotConfig& config);

const char* to_string(PilotClassifier c);

}  // namespace neuroauth
