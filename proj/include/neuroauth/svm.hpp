#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "neuroauth/matrix.hpp"

namespace neuroauth {

enum class KernelType { kLinear, kRbf };
enum class GammaMode { kScale, kAuto, kValue };

struct SvmSpec {
  KernelType kernel{KernelType::kRbf};
  double C{1.0};
  GammaMode gamma_mode{GammaMode::kScale};
  double gamma_value{0.0};  // used when gamma_mode == kValue
  double tolerance{1e-3};
  std::size_t max_iterations{1'000'000};
  bool record_objective{false};

  void validate() const;
  bool operator==(const SvmSpec&) const = default;
};

// auto: 1/d; scale: 1/(d * var) with var the population variance of every
// training value pooled.
double resolve_gamma(GammaMode mode, const Matrix& train);

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

struct SvmModel {
  KernelType kernel{KernelType::kRbf};
  double C{1.0};
  double gamma{0.0};
  Matrix support;             // support vectors, one per row
  std::vector<double> coef;   // alpha_i * y_i, y in {-1, +1}
  double bias{0.0};
  std::vector<double> weights;  // collapsed primal weights (linear kernel only)
  bool converged{true};
  std::size_t iterations{0};
  double max_violation{0.0};
  std::vector<double> objective_trace;  // dual objective per iteration, when recorded

  double decision(std::span<const double> x) const;
  std::vector<double> decision(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
};

// Lazily computed Gram matrices of one training matrix, shared by every SVM
// fitted on it (grid cells differ only in C and gamma).
class SvmTrainingCache {
 public:
  explicit SvmTrainingCache(const Matrix& train, std::size_t budget_bytes = std::size_t{1} << 30);

  const Matrix& train() const { return train_; }
  bool dense_allowed() const;
  // n x n, row-major; nullptr when over budget.
  std::shared_ptr<const std::vector<float>> dot_gram() const;
  std::shared_ptr<const std::vector<float>> distance_gram() const;

 private:
  const Matrix& train_;
  std::size_t budget_bytes_;
  mutable std::shared_ptr<std::vector<float>> dot_;
  mutable std::shared_ptr<std::vector<float>> dist_;
};

// Soft-margin dual solved by SMO with second-order working-pair selection.
// labels are {0, 1}; class 1 maps to y = +1. Hitting the iteration cap
// returns a model flagged converged = false.
SvmModel train_svm(const Matrix& train, std::span<const int> labels, const SvmSpec& spec,
                   const SvmTrainingCache* cache = nullptr);

// One-vs-one multi-class wrapper; vote ties resolve to the smaller label.
struct MultiSvmModel {
  std::vector<int> classes;
  std::vector<SvmModel> pairs;  // (0,1), (0,2), ..., (1,2), ...
  std::vector<int> predict(const Matrix& x) const;
};

MultiSvmModel train_multiclass_svm(const Matrix& train, std::span<const int> labels,
                                   const SvmSpec& spec);

}  // namespace neuroauth
