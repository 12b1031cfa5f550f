#include "neuroauth/featsel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "neuroauth/error.hpp"
#include "neuroauth/parallel.hpp"
#include "neuroauth/random.hpp"

namespace neuroauth {

void ExtraTreesSpec::validate(std::size_t n_features) const {
  if (n_trees < 1) throw Error(ErrorKind::kInvalidArgument, "n_trees must be positive");
  if (max_features < 1 || static_cast<std::size_t>(max_features) > n_features) {
    throw Error(ErrorKind::kInvalidArgument,
                "max_features must lie in [1, " + std::to_string(n_features) + "]");
  }
  if (min_samples_split < 2) throw Error(ErrorKind::kInvalidArgument, "min_samples_split must be >= 2");
}

namespace {

double gini(std::span<const std::size_t> counts, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  const double dn = static_cast<double>(n);
  for (auto c : counts) {
    const double p = static_cast<double>(c) / dn;
    s += p * p;
  }
  return 1.0 - s;
}

struct NodeRange {
  std::size_t begin;
  std::size_t end;
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<double>& columns, std::span<const int> labels, std::size_t n_rows,
             std::size_t n_features, std::size_t n_classes, const ExtraTreesSpec& spec)
      : columns_(columns), labels_(labels), n_rows_(n_rows), n_features_(n_features),
        n_classes_(n_classes), spec_(spec) {}

  // Unnormalized importance of one tree.
  std::vector<double> grow(Rng& rng) const {
    std::vector<double> importance(n_features_, 0.0);
    std::vector<std::size_t> idx(n_rows_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> features(n_features_);
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::vector<std::size_t> counts(n_classes_), left(n_classes_), right(n_classes_);

    std::vector<NodeRange> stack{{0, n_rows_}};
    const double total = static_cast<double>(n_rows_);
    while (!stack.empty()) {
      const NodeRange node = stack.back();
      stack.pop_back();
      const std::size_t n = node.end - node.begin;
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = node.begin; i < node.end; ++i) ++counts[labels_[idx[i]]];
      const double impurity = gini(counts, n);
      if (n < static_cast<std::size_t>(spec_.min_samples_split) || impurity <= 0.0) continue;

      double best_gain = -1.0;
      std::size_t best_feature = 0;
      double best_cut = 0.0;
      std::size_t visited = 0;
      // Draw candidate features without replacement; constant ones do not
      // count toward max_features.
      for (std::size_t drawn = 0;
           drawn < n_features_ && visited < static_cast<std::size_t>(spec_.max_features); ++drawn) {
        const std::size_t pick = drawn + rng.below(n_features_ - drawn);
        std::swap(features[drawn], features[pick]);
        const std::size_t f = features[drawn];
        const double* col = columns_.data() + f * n_rows_;
        double lo = col[idx[node.begin]];
        double hi = lo;
        for (std::size_t i = node.begin + 1; i < node.end; ++i) {
          const double v = col[idx[i]];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (!(hi > lo)) continue;
        ++visited;
        double cut = rng.uniform(lo, hi);
        if (cut >= hi) cut = lo;
        std::fill(left.begin(), left.end(), 0);
        std::size_t n_left = 0;
        for (std::size_t i = node.begin; i < node.end; ++i) {
          if (col[idx[i]] <= cut) {
            ++left[labels_[idx[i]]];
            ++n_left;
          }
        }
        const std::size_t n_right = n - n_left;
        for (std::size_t k = 0; k < n_classes_; ++k) right[k] = counts[k] - left[k];
        const double dn = static_cast<double>(n);
        const double child = (static_cast<double>(n_left) / dn) * gini(left, n_left) +
                             (static_cast<double>(n_right) / dn) * gini(right, n_right);
        const double gain = (dn / total) * (impurity - child);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_cut = cut;
        }
      }
      if (best_gain < 0.0) continue;  // every feature constant in this node

      importance[best_feature] += best_gain;
      const double* col = columns_.data() + best_feature * n_rows_;
      auto mid = std::stable_partition(idx.begin() + node.begin, idx.begin() + node.end,
                                       [&](std::size_t r) { return col[r] <= best_cut; });
      const std::size_t split = static_cast<std::size_t>(mid - idx.begin());
      stack.push_back({split, node.end});
      stack.push_back({node.begin, split});
    }
    return importance;
  }

 private:
  const std::vector<double>& columns_;
  std::span<const int> labels_;
  std::size_t n_rows_;
  std::size_t n_features_;
  std::size_t n_classes_;
  const ExtraTreesSpec& spec_;
};

}  // namespace

ImportanceVector fit_importance(const Matrix& train, std::span<const int> labels,
                                const ExtraTreesSpec& spec) {
  if (train.rows() == 0) throw Error(ErrorKind::kEmptyInput, "fit_importance on empty matrix");
  if (labels.size() != train.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "fit_importance: label count does not match rows");
  }
  spec.validate(train.cols());
  int max_label = 0;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorKind::kInvalidArgument, "labels must be non-negative");
    max_label = std::max(max_label, l);
  }
  const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;
  if (std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; })) {
    throw Error(ErrorKind::kSingleClass, "fit_importance needs at least two classes");
  }

  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  std::vector<double> columns(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) columns[c * n + r] = train(r, c);
  }

  const TreeGrower grower(columns, labels, n, d, n_classes, spec);
  std::vector<std::vector<double>> per_tree(spec.n_trees);
  parallel_for(per_tree.size(), [&](std::size_t t) {
    Rng rng(derive_seed(spec.seed, "extra-trees", {t}));
    per_tree[t] = grower.grow(rng);
  });

  ImportanceVector imp(d, 0.0);
  for (const auto& tree : per_tree) {
    const double s = std::accumulate(tree.begin(), tree.end(), 0.0);
    if (s <= 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) imp[j] += tree[j] / s;
  }
  const double s = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (s > 0.0) {
    for (auto& v : imp) v /= s;
  }
  return imp;
}

SelectionMask select_features(std::span<const double> importance, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "threshold must be >= 0");
  SelectionMask mask;
  mask.threshold = threshold;
  for (std::size_t i = 0; i < importance.size(); ++i) {
    if (importance[i] >= threshold) mask.indices.push_back(i);
  }
  if (mask.indices.empty()) {
    throw Error(ErrorKind::kEmptySelection,
                "no feature reaches threshold " + std::to_string(threshold));
  }
  return mask;
}

ThresholdChoice tune_threshold(std::span<const double> importance,
                               std::span<const double> candidates,
                               const std::function<double(const SelectionMask&)>& eval) {
  if (candidates.empty()) throw Error(ErrorKind::kInvalidArgument, "no threshold candidates");
  ThresholdChoice choice;
  bool found = false;
  double best_score = 0.0;
  for (double t : candidates) {
    ThresholdTrial trial;
    trial.threshold = t;
    SelectionMask mask;
    try {
      mask = select_features(importance, t);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptySelection) throw;
      choice.trials.push_back(trial);
      continue;
    }
    trial.n_selected = mask.size();
    trial.score = eval(mask);
    trial.evaluated = true;
    choice.trials.push_back(trial);
    if (!found || trial.score > best_score ||
        (trial.score == best_score && t > choice.threshold)) {
      found = true;
      best_score = trial.score;
      choice.threshold = t;
      choice.mask = std::move(mask);
    }
  }
  if (!found) throw Error(ErrorKind::kEmptySelection, "every threshold candidate selects no features");
  return choice;
}

}  // namespace neuroauth
