#include "neuroauth/classifier.hpp"

#include <cstdio>

#include "neuroauth/error.hpp"

namespace neuroauth {

using nlohmann::json;

const char* to_string(ClassifierFamily family) {
  switch (family) {
    case ClassifierFamily::kKnn: return "knn";
    case ClassifierFamily::kLda: return "lda";
    case ClassifierFamily::kLinearSvm: return "lsvm";
    case ClassifierFamily::kRbfSvm: return "nlsvm";
  }
  return "?";
}

ClassifierFamily parse_family(const std::string& name) {
  if (name == "knn") return ClassifierFamily::kKnn;
  if (name == "lda") return ClassifierFamily::kLda;
  if (name == "lsvm") return ClassifierFamily::kLinearSvm;
  if (name == "nlsvm") return ClassifierFamily::kRbfSvm;
  throw Error(ErrorKind::kInvalidArgument, "unknown classifier '" + name + "' (knn|lda|lsvm|nlsvm)");
}

namespace {

const char* metric_name(DistanceMetric m) {
  return m == DistanceMetric::kManhattan ? "manhattan" : "euclidean";
}

DistanceMetric parse_metric(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::kEuclidean;
  if (s == "manhattan") return DistanceMetric::kManhattan;
  throw Error(ErrorKind::kInvalidConfig, "unknown distance metric '" + s + "'");
}

json gamma_json(const SvmSpec& s) {
  switch (s.gamma_mode) {
    case GammaMode::kScale: return "scale";
    case GammaMode::kAuto: return "auto";
    case GammaMode::kValue: return s.gamma_value;
  }
  return nullptr;
}

void parse_gamma(const json& g, SvmSpec& s) {
  if (g.is_string()) {
    const auto v = g.get<std::string>();
    if (v == "scale") s.gamma_mode = GammaMode::kScale;
    else if (v == "auto") s.gamma_mode = GammaMode::kAuto;
    else throw Error(ErrorKind::kInvalidConfig, "unknown gamma mode '" + v + "'");
  } else {
    s.gamma_mode = GammaMode::kValue;
    s.gamma_value = g.get<double>();
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t cols_if_empty = 0) {
  Matrix m(0, cols_if_empty);
  for (const auto& row : j) m.append_row(row.get<std::vector<double>>());
  return m;
}

}  // namespace

std::string describe(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KnnSpec>) {
          return "knn(k=" + std::to_string(s.k) + ", " + metric_name(s.metric) + ")";
        } else if constexpr (std::is_same_v<T, LdaSpec>) {
          return "lda(eigen)";
        } else {
          char buf[96];
          std::snprintf(buf, sizeof(buf), "%s(C=%g", s.kernel == KernelType::kLinear ? "lsvm" : "nlsvm", s.C);
          std::string out = buf;
          if (s.kernel == KernelType::kRbf) {
            out += ", gamma=";
            out += s.gamma_mode == GammaMode::kScale ? "scale"
                   : s.gamma_mode == GammaMode::kAuto ? "auto"
                                                      : std::to_string(s.gamma_value);
          }
          return out + ")";
        }
      },
      spec);
}

std::vector<ClassifierSpec> default_grid(ClassifierFamily family) {
  std::vector<ClassifierSpec> grid;
  switch (family) {
    case ClassifierFamily::kKnn:
      for (int k : {4, 5, 6}) {
        for (auto m : {DistanceMetric::kEuclidean, DistanceMetric::kManhattan}) grid.push_back(KnnSpec{k, m});
      }
      break;
    case ClassifierFamily::kLda:
      grid.push_back(LdaSpec{});
      break;
    case ClassifierFamily::kLinearSvm:
      for (double c : {0.1, 1.0, 10.0, 100.0}) {
        SvmSpec s;
        s.kernel = KernelType::kLinear;
        s.C = c;
        grid.push_back(s);
      }
      break;
    case ClassifierFamily::kRbfSvm:
      for (double c : {0.1, 1.0, 10.0, 100.0}) {
        for (auto g : {GammaMode::kScale, GammaMode::kAuto}) {
          SvmSpec s;
          s.kernel = KernelType::kRbf;
          s.C = c;
          s.gamma_mode = g;
          grid.push_back(s);
        }
      }
      break;
  }
  return grid;
}

ClassifierSpec default_cell(ClassifierFamily family) {
  switch (family) {
    case ClassifierFamily::kKnn: return KnnSpec{5, DistanceMetric::kEuclidean};
    case ClassifierFamily::kLda: return LdaSpec{};
    case ClassifierFamily::kLinearSvm: {
      SvmSpec s;
      s.kernel = KernelType::kLinear;
      return s;
    }
    case ClassifierFamily::kRbfSvm: return SvmSpec{};
  }
  return LdaSpec{};
}

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Matrix& train,
                                   std::span<const int> labels, const TrainingContext* context) {
  return std::visit(
      [&](const auto& s) -> TrainedClassifier {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KnnSpec>) {
          return train_knn(train, labels, s);
        } else if constexpr (std::is_same_v<T, LdaSpec>) {
          return train_lda(train, labels);
        } else {
          const SvmTrainingCache* cache =
              context != nullptr && &context->train() == &train ? &context->svm_cache() : nullptr;
          return train_svm(train, labels, s, cache);
        }
      },
      spec);
}

std::vector<int> predict(const TrainedClassifier& model, const Matrix& x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::kInvalidArgument, "accuracy: size mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

GridSearchResult grid_search(const Matrix& train, std::span<const int> train_labels,
                             const Matrix& val, std::span<const int> val_labels,
                             std::span<const ClassifierSpec> grid) {
  if (grid.empty()) throw Error(ErrorKind::kInvalidArgument, "grid_search: empty grid");
  const TrainingContext context(train);
  GridSearchResult result;
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    GridCellResult cell;
    cell.spec = grid[c];
    try {
      TrainedClassifier model = train_classifier(grid[c], train, train_labels, &context);
      if (const auto* svm = std::get_if<SvmModel>(&model)) cell.converged = svm->converged;
      cell.val_accuracy = accuracy(predict(model, val), val_labels);
      cell.trained = true;
      if (!best || cell.val_accuracy > result.val_accuracy) {
        best = c;
        result.val_accuracy = cell.val_accuracy;
        result.model = std::move(model);
      }
    } catch (const Error& e) {
      cell.error = e.what();
    }
    result.cells.push_back(std::move(cell));
  }
  if (!best) {
    throw Error(ErrorKind::kStageFailure,
                "grid_search: every cell failed to train (first error: " + result.cells[0].error + ")");
  }
  result.best_index = *best;
  result.best_spec = grid[*best];
  return result;
}

void to_json(json& j, const ClassifierSpec& spec) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KnnSpec>) {
          j = {{"type", "knn"}, {"k", s.k}, {"metric", metric_name(s.metric)}};
        } else if constexpr (std::is_same_v<T, LdaSpec>) {
          j = {{"type", "lda"}, {"solver", "eigen"}};
        } else {
          j = {{"type", "svm"},
               {"kernel", s.kernel == KernelType::kLinear ? "linear" : "rbf"},
               {"C", s.C},
               {"tolerance", s.tolerance},
               {"max_iterations", s.max_iterations}};
          if (s.kernel == KernelType::kRbf) j["gamma"] = gamma_json(s);
        }
      },
      spec);
}

ClassifierSpec spec_from_json(const json& j, std::optional<ClassifierFamily> family) {
  try {
    std::string type;
    if (j.contains("type")) {
      type = j.at("type").get<std::string>();
    } else if (family) {
      type = *family == ClassifierFamily::kKnn   ? "knn"
             : *family == ClassifierFamily::kLda ? "lda"
                                                 : "svm";
    } else {
      throw Error(ErrorKind::kInvalidConfig, "classifier spec without a type");
    }
    if (type == "knn") {
      KnnSpec s;
      s.k = j.value("k", 5);
      s.metric = parse_metric(j.value("metric", std::string("euclidean")));
      if (s.k < 1) throw Error(ErrorKind::kInvalidConfig, "kNN k must be >= 1");
      return s;
    }
    if (type == "lda") return LdaSpec{};
    if (type == "svm") {
      SvmSpec s;
      std::string kernel = family == ClassifierFamily::kLinearSvm ? "linear" : "rbf";
      kernel = j.value("kernel", kernel);
      if (kernel == "linear") s.kernel = KernelType::kLinear;
      else if (kernel == "rbf") s.kernel = KernelType::kRbf;
      else throw Error(ErrorKind::kInvalidConfig, "unknown kernel '" + kernel + "'");
      s.C = j.value("C", 1.0);
      if (j.contains("gamma")) parse_gamma(j.at("gamma"), s);
      s.tolerance = j.value("tolerance", s.tolerance);
      s.max_iterations = j.value("max_iterations", s.max_iterations);
      s.validate();
      return s;
    }
    throw Error(ErrorKind::kInvalidConfig, "unknown classifier type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, std::string("bad classifier spec: ") + e.what());
  }
}

std::vector<ClassifierSpec> grid_from_json(const json& j, ClassifierFamily family) {
  std::vector<ClassifierSpec> grid;
  if (j.is_array()) {
    for (const auto& cell : j) grid.push_back(spec_from_json(cell, family));
  } else if (j.is_object()) {
    // Cartesian form: lists per hyperparameter, first key varies slowest.
    auto list = [&](const char* key, json fallback) {
      if (!j.contains(key)) return json::array({fallback});
      const auto& v = j.at(key);
      return v.is_array() ? v : json::array({v});
    };
    switch (family) {
      case ClassifierFamily::kKnn:
        for (const auto& k : list("k", 5)) {
          for (const auto& m : list("metric", "euclidean")) {
            grid.push_back(spec_from_json({{"type", "knn"}, {"k", k}, {"metric", m}}, family));
          }
        }
        break;
      case ClassifierFamily::kLda:
        grid.push_back(LdaSpec{});
        break;
      case ClassifierFamily::kLinearSvm:
        for (const auto& c : list("C", 1.0)) {
          grid.push_back(spec_from_json({{"type", "svm"}, {"kernel", "linear"}, {"C", c}}, family));
        }
        break;
      case ClassifierFamily::kRbfSvm:
        for (const auto& c : list("C", 1.0)) {
          for (const auto& g : list("gamma", "scale")) {
            grid.push_back(
                spec_from_json({{"type", "svm"}, {"kernel", "rbf"}, {"C", c}, {"gamma", g}}, family));
          }
        }
        break;
    }
  } else {
    throw Error(ErrorKind::kInvalidConfig, "grid must be an array of cells or an object of lists");
  }
  if (grid.empty()) throw Error(ErrorKind::kInvalidConfig, "grid is empty");
  return grid;
}

json model_to_json(const TrainedClassifier& model) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          j["variant"] = "knn";
          j["spec"] = ClassifierSpec(m.spec);
          j["train"] = matrix_json(m.train);
          j["labels"] = m.labels;
        } else if constexpr (std::is_same_v<T, LdaModel>) {
          j["variant"] = "lda";
          j["classes"] = m.classes;
          j["n_features"] = m.scalings.rows();
          j["scalings"] = matrix_json(m.scalings);
          j["projected_means"] = matrix_json(m.projected_means);
          j["log_priors"] = m.log_priors;
          j["eigenvalues"] = m.eigenvalues;
          j["regularized"] = m.regularized;
          j["ridge"] = m.ridge;
        } else {
          j["variant"] = "svm";
          j["kernel"] = m.kernel == KernelType::kLinear ? "linear" : "rbf";
          j["C"] = m.C;
          j["gamma"] = m.gamma;
          j["bias"] = m.bias;
          j["n_features"] = m.support.cols();
          j["support_vectors"] = matrix_json(m.support);
          j["dual_coef"] = m.coef;
          j["weights"] = m.weights;
          j["converged"] = m.converged;
          j["iterations"] = m.iterations;
        }
      },
      model);
  return j;
}

TrainedClassifier model_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw Error(ErrorKind::kMalformedDocument, "unsupported model schema_version");
    }
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "knn") {
      KnnModel m;
      m.spec = std::get<KnnSpec>(spec_from_json(j.at("spec")));
      m.train = matrix_from_json(j.at("train"));
      m.labels = j.at("labels").get<std::vector<int>>();
      return m;
    }
    if (variant == "lda") {
      LdaModel m;
      m.classes = j.at("classes").get<std::vector<int>>();
      m.scalings = matrix_from_json(j.at("scalings"));
      m.projected_means = matrix_from_json(j.at("projected_means"));
      m.log_priors = j.at("log_priors").get<std::vector<double>>();
      m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
      m.regularized = j.at("regularized").get<bool>();
      m.ridge = j.at("ridge").get<double>();
      return m;
    }
    if (variant == "svm") {
      SvmModel m;
      m.kernel = j.at("kernel").get<std::string>() == "linear" ? KernelType::kLinear : KernelType::kRbf;
      m.C = j.at("C").get<double>();
      m.gamma = j.at("gamma").get<double>();
      m.bias = j.at("bias").get<double>();
      m.support = matrix_from_json(j.at("support_vectors"), j.at("n_features").get<std::size_t>());
      m.coef = j.at("dual_coef").get<std::vector<double>>();
      m.weights = j.at("weights").get<std::vector<double>>();
      m.converged = j.at("converged").get<bool>();
      m.iterations = j.at("iterations").get<std::size_t>();
      return m;
    }
    throw Error(ErrorKind::kMalformedDocument, "unknown model variant '" + variant + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, std::string("malformed model: ") + e.what());
  }
}

}  // namespace neuroauth
