#pragma once

#include <span>
#include <vector>

#include "neuroauth/matrix.hpp"

namespace neuroauth {

enum class DistanceMetric { kEuclidean, kManhattan };

struct KnnSpec {
  int k{5};
  DistanceMetric metric{DistanceMetric::kEuclidean};

  bool operator==(const KnnSpec&) const = default;
};

struct KnnModel {
  KnnSpec spec;
  Matrix train;
  std::vector<int> labels;

  // Distance ties go to the lower training index, vote ties to the smaller label.
  std::vector<int> predict(const Matrix& x) const;
  // Indices of the k nearest training rows for one query, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> query) const;
};

KnnModel train_knn(const Matrix& train, std::span<const int> labels, const KnnSpec& spec);

}  // namespace neuroauth
