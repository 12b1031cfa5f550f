#pragma once

// Fixtures shared by the unit suites and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neuroauth/classifier.hpp"
#include "neuroauth/features.hpp"
#include "neuroauth/protocol.hpp"
#include "neuroauth/random.hpp"

namespace neuroauth::testing {

// Gaussian rows around a per-user centre; the first `informative` columns
// carry the user offset, the rest are pure noise.
inline FeatureMatrix blob_features(int n_users, int n_sessions, std::size_t rows_per_session, std::size_t cols,
                                   std::size_t informative, double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> centre(n_users, std::vector<double>(cols, 0.0));
  for (auto& c : centre) {
    for (std::size_t j = 0; j < informative; ++j) c[j] = rng.normal() * separation;
  }
  FeatureMatrix fm;
  fm.values = Matrix(0, cols);
  for (std::size_t j = 0; j < cols; ++j) fm.column_names.push_back("f" + std::to_string(j));
  std::vector<double> row(cols);
  for (int u = 1; u <= n_users; ++u) {
    for (int s = 1; s <= n_sessions; ++s) {
      for (std::size_t w = 0; w < rows_per_session; ++w) {
        for (std::size_t j = 0; j < cols; ++j) row[j] = centre[u - 1][j] + rng.normal();
        fm.values.append_row(row);
        fm.meta.push_back(RowMeta{u, s, w, w * 63});
      }
    }
  }
  return fm;
}

// Empty when 0 <= alpha <= C and |sum alpha y| <= 1e-6; otherwise the reason.
inline std::string dual_violation(const SvmModel& m) {
  double s = 0.0;
  for (double c : m.coef) {
    if (!(std::abs(c) <= m.C * (1.0 + 1e-12))) return "alpha outside [0, C]";
    s += c;
  }
  if (!(std::abs(s) <= 1e-6)) return "sum alpha y = " + std::to_string(s);
  return {};
}

inline std::string dual_violation(const MultiSvmModel& m) {
  for (const auto& p : m.pairs) {
    if (auto why = dual_violation(p); !why.empty()) return why;
  }
  return {};
}

inline std::string dual_violation(const TrainedClassifier& model) {
  if (const auto* svm = std::get_if<SvmModel>(&model)) return dual_violation(*svm);
  return {};
}

// Empty when every train-fitted quantity is bit-identical; otherwise the first difference.
inline std::string fit_difference(const UserFit& a, const UserFit& b) {
  if (a.user_id != b.user_id) return "user id";
  if (!(a.normalizer == b.normalizer)) return "normalizer";
  if (a.importance != b.importance) return "importances";
  if (a.families.size() != b.families.size()) return "family count";
  for (std::size_t f = 0; f < a.families.size(); ++f) {
    const FamilyFit& x = a.families[f];
    const FamilyFit& y = b.families[f];
    const std::string fam = to_string(x.family);
    if (x.threshold.threshold != y.threshold.threshold) return fam + " threshold";
    if (!(x.threshold.mask == y.threshold.mask)) return fam + " selected features";
    for (std::size_t t = 0; t < x.threshold.trials.size(); ++t) {
      if (x.threshold.trials[t].score != y.threshold.trials[t].score) return fam + " threshold trial score";
    }
    if (x.grid.best_index != y.grid.best_index) return fam + " grid choice";
    for (std::size_t c = 0; c < x.grid.cells.size(); ++c) {
      if (x.grid.cells[c].val_accuracy != y.grid.cells[c].val_accuracy) return fam + " grid cell score";
    }
    // shortest round-trip decimals: equal text <=> equal doubles
    if (model_to_json(x.grid.model).dump() != model_to_json(y.grid.model).dump()) return fam + " model";
  }
  return {};
}

// Small forest and two-cell grids so one-vs-rest runs stay fast.
inline AuthConfig quick_auth_config(std::uint64_t seed) {
  AuthConfig c;
  c.seed = seed;
  c.trees.n_trees = 15;
  c.trees.max_features = 3;
  c.threshold_multipliers = {0.5, 1.0, 1.5};
  c.classifiers = {ClassifierFamily::kLinearSvm, ClassifierFamily::kRbfSvm};
  c.grids[ClassifierFamily::kLinearSvm] = {SvmSpec{KernelType::kLinear, 0.1}, SvmSpec{KernelType::kLinear, 1.0}};
  c.grids[ClassifierFamily::kRbfSvm] = {SvmSpec{KernelType::kRbf, 1.0}, SvmSpec{KernelType::kRbf, 10.0}};
  return c;
}

}  // namespace neuroauth::testing
