#pragma once

#include <span>
#include <vector>

#include "neuroauth/matrix.hpp"

namespace neuroauth {

struct LdaSpec {
  bool operator==(const LdaSpec&) const = default;
};

struct LdaModel {
  std::vector<int> classes;
  Matrix scalings;          // d x m projection basis, m <= classes - 1
  Matrix projected_means;   // classes x m
  std::vector<double> log_priors;
  std::vector<double> eigenvalues;  // descending, one per kept direction
  bool regularized{false};
  double ridge{0.0};

  Matrix transform(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
};

// Fisher discriminant via the generalized eigenproblem Sb v = lambda Sw v.
// A ridge of 1e-6 * trace(Sw) / d is added when Sw is singular.
LdaModel train_lda(const Matrix& train, std::span<const int> labels);

}  // namespace neuroauth
