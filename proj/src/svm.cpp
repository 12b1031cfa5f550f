#include "neuroauth/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>
#include <unordered_map>

#include "neuroauth/error.hpp"
#include "neuroauth/kernels.hpp"

namespace neuroauth {

void SvmSpec::validate() const {
  if (!(C > 0.0)) throw Error(ErrorKind::kInvalidArgument, "SVM C must be positive");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::kInvalidArgument, "SVM tolerance must be positive");
  if (max_iterations == 0) throw Error(ErrorKind::kInvalidArgument, "SVM iteration cap must be positive");
  if (kernel == KernelType::kRbf && gamma_mode == GammaMode::kValue && !(gamma_value > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "explicit gamma must be positive");
  }
}

double resolve_gamma(GammaMode mode, const Matrix& train) {
  const std::size_t d = train.cols();
  if (d == 0) throw Error(ErrorKind::kInvalidArgument, "resolve_gamma needs at least one feature");
  if (mode == GammaMode::kAuto) return 1.0 / static_cast<double>(d);
  if (mode == GammaMode::kValue) {
    throw Error(ErrorKind::kInvalidArgument, "resolve_gamma: explicit gamma has no derived value");
  }
  const auto& v = train.data();
  if (v.empty()) throw Error(ErrorKind::kEmptyInput, "resolve_gamma on empty matrix");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  if (!(var > 0.0)) {
    throw Error(ErrorKind::kDegenerate, "gamma=scale undefined: training values have zero variance");
  }
  return 1.0 / (static_cast<double>(d) * var);
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  return std::exp(-gamma * kernels::squared_distance(x, y));
}

double SvmModel::decision(std::span<const double> x) const {
  if (kernel == KernelType::kLinear) return kernels::dot(weights, x) + bias;
  double f = bias;
  for (std::size_t s = 0; s < support.rows(); ++s) f += coef[s] * rbf_kernel(support.row(s), x, gamma);
  return f;
}

std::vector<double> SvmModel::decision(const Matrix& x) const {
  std::vector<double> out(x.rows());
  if (kernel == KernelType::kLinear) {
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = kernels::dot(weights, x.row(i)) + bias;
  } else {
    kernels::parallel::rbf_decision(support, coef, gamma, bias, x, out);
  }
  return out;
}

std::vector<int> SvmModel::predict(const Matrix& x) const {
  const auto f = decision(x);
  std::vector<int> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] >= 0.0 ? 1 : 0;
  return out;
}

SvmTrainingCache::SvmTrainingCache(const Matrix& train, std::size_t budget_bytes)
    : train_(train), budget_bytes_(budget_bytes) {}

bool SvmTrainingCache::dense_allowed() const {
  const double n = static_cast<double>(train_.rows());
  // the shared Gram plus one derived kernel matrix
  return 2.0 * n * n * sizeof(float) <= static_cast<double>(budget_bytes_);
}

std::shared_ptr<const std::vector<float>> SvmTrainingCache::dot_gram() const {
  if (!dense_allowed()) return nullptr;
  if (!dot_) {
    dot_ = std::make_shared<std::vector<float>>(train_.rows() * train_.rows());
    kernels::parallel::gram(train_, GramKind::kDot, *dot_);
  }
  return dot_;
}

std::shared_ptr<const std::vector<float>> SvmTrainingCache::distance_gram() const {
  if (!dense_allowed()) return nullptr;
  if (!dist_) {
    dist_ = std::make_shared<std::vector<float>>(train_.rows() * train_.rows());
    kernels::parallel::gram(train_, GramKind::kSquaredDistance, *dist_);
  }
  return dist_;
}

namespace {

constexpr double kTau = 1e-12;

class KernelRows {
 public:
  virtual ~KernelRows() = default;
  virtual const float* row(std::size_t i) = 0;
};

class DenseRows final : public KernelRows {
 public:
  DenseRows(std::shared_ptr<const std::vector<float>> data, std::size_t n)
      : data_(std::move(data)), n_(n) {}
  const float* row(std::size_t i) override { return data_->data() + i * n_; }

 private:
  std::shared_ptr<const std::vector<float>> data_;
  std::size_t n_;
};

// Rows computed on demand, least recently used evicted beyond the budget.
class LruRows final : public KernelRows {
 public:
  LruRows(const Matrix& x, KernelType kernel, double gamma, std::size_t max_rows)
      : x_(x), kernel_(kernel), gamma_(gamma), max_rows_(std::max<std::size_t>(max_rows, 2)) {}

  const float* row(std::size_t i) override {
    auto it = rows_.find(i);
    if (it != rows_.end()) {
      order_.splice(order_.begin(), order_, it->second.second);
      return it->second.first.data();
    }
    if (rows_.size() >= max_rows_) {
      rows_.erase(order_.back());
      order_.pop_back();
    }
    order_.push_front(i);
    auto& entry = rows_[i];
    entry.second = order_.begin();
    entry.first.resize(x_.rows());
    const auto xi = x_.row(i);
    for (std::size_t j = 0; j < x_.rows(); ++j) {
      entry.first[j] = static_cast<float>(kernel_ == KernelType::kLinear
                                              ? kernels::dot(xi, x_.row(j))
                                              : rbf_kernel(xi, x_.row(j), gamma_));
    }
    return entry.first.data();
  }

 private:
  const Matrix& x_;
  KernelType kernel_;
  double gamma_;
  std::size_t max_rows_;
  std::list<std::size_t> order_;
  std::unordered_map<std::size_t, std::pair<std::vector<float>, std::list<std::size_t>::iterator>> rows_;
};

std::unique_ptr<KernelRows> make_rows(const Matrix& x, KernelType kernel, double gamma,
                                      const SvmTrainingCache& cache, std::size_t budget_bytes) {
  const std::size_t n = x.rows();
  if (cache.dense_allowed()) {
    if (kernel == KernelType::kLinear) return std::make_unique<DenseRows>(cache.dot_gram(), n);
    auto dist = cache.distance_gram();
    auto k = std::make_shared<std::vector<float>>(n * n);
    const long long total = static_cast<long long>(n * n);
    const float* d = dist->data();
    float* out = k->data();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < total; ++i) {
      out[i] = static_cast<float>(std::exp(-gamma * static_cast<double>(d[i])));
    }
    return std::make_unique<DenseRows>(std::move(k), n);
  }
  const std::size_t row_bytes = std::max<std::size_t>(n * sizeof(float), 1);
  return std::make_unique<LruRows>(x, kernel, gamma, budget_bytes / row_bytes);
}

}  // namespace

SvmModel train_svm(const Matrix& train, std::span<const int> labels, const SvmSpec& spec,
                   const SvmTrainingCache* cache) {
  spec.validate();
  const std::size_t n = train.rows();
  if (n == 0) throw Error(ErrorKind::kEmptyInput, "train_svm on empty matrix");
  if (labels.size() != n) throw Error(ErrorKind::kInvalidArgument, "train_svm: label count mismatch");
  std::vector<double> y(n);
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorKind::kInvalidArgument, "train_svm expects labels in {0, 1}");
    }
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    has_pos |= labels[i] == 1;
    has_neg |= labels[i] == 0;
  }
  if (!has_pos || !has_neg) throw Error(ErrorKind::kSingleClass, "train_svm needs both classes");

  SvmModel model;
  model.kernel = spec.kernel;
  model.C = spec.C;
  if (spec.kernel == KernelType::kRbf) {
    model.gamma = spec.gamma_mode == GammaMode::kValue ? spec.gamma_value
                                                       : resolve_gamma(spec.gamma_mode, train);
  }

  std::unique_ptr<SvmTrainingCache> own_cache;
  if (cache == nullptr || &cache->train() != &train) {
    own_cache = std::make_unique<SvmTrainingCache>(train);
    cache = own_cache.get();
  }
  auto rows = make_rows(train, spec.kernel, model.gamma, *cache, std::size_t{256} << 20);

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    qd[i] = spec.kernel == KernelType::kLinear ? kernels::dot(train.row(i), train.row(i)) : 1.0;
  }

  const double C = spec.C;
  const double eps = spec.tolerance;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  auto objective = [&]() {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += alpha[i] * (grad[i] - 1.0);
    return -0.5 * f;
  };

  std::size_t iter = 0;
  model.converged = false;
  while (iter < spec.max_iterations) {
    // First index: maximal violation in I_up.
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0.0) {
        if (alpha[t] < C && -grad[t] > gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (alpha[t] > 0.0 && grad[t] > gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    double gmax2 = -kInf;
    std::size_t j = n;
    double obj_min = kInf;
    const float* ki = i < n ? rows->row(i) : nullptr;
    for (std::size_t t = 0; t < n && ki != nullptr; ++t) {
      double grad_diff;
      if (y[t] > 0.0) {
        if (!(alpha[t] > 0.0)) continue;
        gmax2 = std::max(gmax2, grad[t]);
        grad_diff = gmax + grad[t];
      } else {
        if (!(alpha[t] < C)) continue;
        gmax2 = std::max(gmax2, -grad[t]);
        grad_diff = gmax - grad[t];
      }
      if (grad_diff > 0.0) {
        double quad = qd[i] + qd[t] - 2.0 * static_cast<double>(ki[t]);
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj < obj_min) {
          obj_min = obj;
          j = t;
        }
      }
    }
    model.max_violation = gmax + gmax2;
    if (i == n || j == n || gmax + gmax2 < eps) {
      model.converged = true;
      break;
    }
    ++iter;

    const float* kj = rows->row(j);
    ki = rows->row(i);  // an LRU cache may have evicted row i while fetching row j
    const double kij = static_cast<double>(ki[j]);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = (alpha[i] - old_ai) * y[i];
    const double daj = (alpha[j] - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (static_cast<double>(ki[t]) * dai + static_cast<double>(kj[t]) * daj);
    }
    if (spec.record_objective) model.objective_trace.push_back(objective());
  }
  model.iterations = iter;

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = kInf;
  double lb = -kInf;
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0.0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0.0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  model.bias = -rho;

  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      sv.push_back(t);
      model.coef.push_back(alpha[t] * y[t]);
    }
  }
  model.support = train.select_rows(sv);
  if (spec.kernel == KernelType::kLinear) {
    model.weights.assign(train.cols(), 0.0);
    for (std::size_t s = 0; s < sv.size(); ++s) {
      const auto x = model.support.row(s);
      for (std::size_t k = 0; k < x.size(); ++k) model.weights[k] += model.coef[s] * x[k];
    }
  }
  return model;
}

std::vector<int> MultiSvmModel::predict(const Matrix& x) const {
  const std::size_t k = classes.size();
  std::vector<std::vector<int>> pair_predictions;
  pair_predictions.reserve(pairs.size());
  for (const auto& m : pairs) pair_predictions.push_back(m.predict(x));
  std::vector<int> out(x.rows());
  std::vector<int> votes(k);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    std::size_t p = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b, ++p) {
        ++votes[pair_predictions[p][r] == 1 ? a : b];
      }
    }
    const auto best = std::max_element(votes.begin(), votes.end());  // first max = smaller label
    out[r] = classes[static_cast<std::size_t>(best - votes.begin())];
  }
  return out;
}

MultiSvmModel train_multiclass_svm(const Matrix& train, std::span<const int> labels,
                                   const SvmSpec& spec) {
  if (labels.size() != train.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "train_multiclass_svm: label count mismatch");
  }
  MultiSvmModel model;
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw Error(ErrorKind::kSingleClass, "multi-class SVM needs >= 2 classes");

  // gamma resolved once on the full training matrix
  SvmSpec pair_spec = spec;
  if (spec.kernel == KernelType::kRbf && spec.gamma_mode != GammaMode::kValue) {
    pair_spec.gamma_mode = GammaMode::kValue;
    pair_spec.gamma_value = resolve_gamma(spec.gamma_mode, train);
  }
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<std::size_t> rows;
      std::vector<int> pair_labels;
      for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] == model.classes[a] || labels[r] == model.classes[b]) {
          rows.push_back(r);
          pair_labels.push_back(labels[r] == model.classes[a] ? 1 : 0);
        }
      }
      const Matrix sub = train.select_rows(rows);
      model.pairs.push_back(train_svm(sub, pair_labels, pair_spec));
    }
  }
  return model;
}

}  // namespace neuroauth
