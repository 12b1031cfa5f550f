#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "neuroauth/knn.hpp"
#include "neuroauth/lda.hpp"
#include "neuroauth/matrix.hpp"
#include "neuroauth/svm.hpp"

namespace neuroauth {

enum class ClassifierFamily { kKnn, kLda, kLinearSvm, kRbfSvm };

const char* to_string(ClassifierFamily family);
ClassifierFamily parse_family(const std::string& name);  // knn | lda | lsvm | nlsvm

using ClassifierSpec = std::variant<KnnSpec, LdaSpec, SvmSpec>;
using TrainedClassifier = std::variant<KnnModel, LdaModel, SvmModel>;

std::string describe(const ClassifierSpec& spec);

// Grids in declared order (outer loop first in the listing).
std::vector<ClassifierSpec> default_grid(ClassifierFamily family);
// The cell used while tuning the feature-selection threshold.
ClassifierSpec default_cell(ClassifierFamily family);

// Shared training state for a fixed training matrix (SVM Gram cache).
class TrainingContext {
 public:
  explicit TrainingContext(const Matrix& train) : train_(train), svm_cache_(train) {}
  const Matrix& train() const { return train_; }
  const SvmTrainingCache& svm_cache() const { return svm_cache_; }

 private:
  const Matrix& train_;
  SvmTrainingCache svm_cache_;
};

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Matrix& train,
                                   std::span<const int> labels,
                                   const TrainingContext* context = nullptr);
std::vector<int> predict(const TrainedClassifier& model, const Matrix& x);
double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct GridCellResult {
  ClassifierSpec spec;
  bool trained{false};
  double val_accuracy{0.0};
  bool converged{true};
  std::string error;
};

struct GridSearchResult {
  std::size_t best_index{0};
  ClassifierSpec best_spec;
  TrainedClassifier model;
  double val_accuracy{0.0};
  std::vector<GridCellResult> cells;  // declared order
};

// Trains every cell on train, scores accuracy on val; ties keep the earlier cell.
GridSearchResult grid_search(const Matrix& train, std::span<const int> train_labels,
                             const Matrix& val, std::span<const int> val_labels,
                             std::span<const ClassifierSpec> grid);

// JSON forms of specs and fitted models.
void to_json(nlohmann::json& j, const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j, std::optional<ClassifierFamily> family = {});
std::vector<ClassifierSpec> grid_from_json(const nlohmann::json& j, ClassifierFamily family);

inline constexpr int kModelSchemaVersion = 1;
nlohmann::json model_to_json(const TrainedClassifier& model);
TrainedClassifier model_from_json(const nlohmann::json& j);

}  // namespace neuroauth
