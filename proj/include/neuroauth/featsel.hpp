#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "neuroauth/matrix.hpp"

namespace neuroauth {

struct ExtraTreesSpec {
  int n_trees{100};
  int max_features{14};  // ceil(sqrt(192))
  int min_samples_split{2};
  std::uint64_t seed{0};

  void validate(std::size_t n_features) const;
};

using ImportanceVector = std::vector<double>;

struct SelectionMask {
  std::vector<std::size_t> indices;  // ascending
  double threshold{0.0};

  std::size_t size() const { return indices.size(); }
  bool operator==(const SelectionMask&) const = default;
};

// Mean-decrease-in-Gini importances of an extremely randomized forest grown on
// the full training set (no bootstrap). Each tree derives its random stream
// from (spec.seed, tree index), so the result does not depend on threading.
ImportanceVector fit_importance(const Matrix& train, std::span<const int> labels,
                                const ExtraTreesSpec& spec);

// Retains every i with importance[i] >= threshold.
SelectionMask select_features(std::span<const double> importance, double threshold);

struct ThresholdTrial {
  double threshold{0.0};
  std::size_t n_selected{0};
  double score{0.0};
  bool evaluated{false};  // false when the mask was empty
};

struct ThresholdChoice {
  double threshold{0.0};
  SelectionMask mask;
  std::vector<ThresholdTrial> trials;  // candidate order
};

// Argmax of eval over the candidates; ties go to the larger threshold.
ThresholdChoice tune_threshold(std::span<const double> importance,
                               std::span<const double> candidates,
                               const std::function<double(const SelectionMask&)>& eval);

}  // namespace neuroauth
