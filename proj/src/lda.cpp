#include "neuroauth/lda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "neuroauth/error.hpp"

namespace neuroauth {

LdaModel train_lda(const Matrix& train, std::span<const int> labels) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  if (n == 0 || d == 0) throw Error(ErrorKind::kEmptyInput, "train_lda on empty matrix");
  if (labels.size() != n) throw Error(ErrorKind::kInvalidArgument, "train_lda: label count mismatch");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < n; ++r) by_class[labels[r]].push_back(r);
  if (by_class.size() < 2) throw Error(ErrorKind::kSingleClass, "train_lda needs at least 2 classes");

  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      train.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

  const std::size_t k = by_class.size();
  LdaModel model;
  Eigen::MatrixXd means(k, d);
  const Eigen::RowVectorXd overall = x.colwise().mean();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  std::size_t ci = 0;
  for (const auto& [label, rows] : by_class) {
    model.classes.push_back(label);
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(d);
    for (auto r : rows) mu += x.row(static_cast<Eigen::Index>(r));
    mu /= static_cast<double>(rows.size());
    means.row(ci) = mu;
    for (auto r : rows) {
      const Eigen::RowVectorXd c = x.row(static_cast<Eigen::Index>(r)) - mu;
      sw.noalias() += c.transpose() * c;
    }
    const double prior = static_cast<double>(rows.size()) / static_cast<double>(n);
    const Eigen::RowVectorXd dm = mu - overall;
    sb.noalias() += prior * dm.transpose() * dm;
    model.log_priors.push_back(std::log(prior));
    ++ci;
  }
  sw /= static_cast<double>(n);

  // Singular within-class scatter gets a trace-relative ridge.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sw_eig(sw, Eigen::EigenvaluesOnly);
  const double max_ev = sw_eig.eigenvalues().maxCoeff();
  const double min_ev = sw_eig.eigenvalues().minCoeff();
  if (!(min_ev > 1e-10 * std::max(max_ev, 0.0)) || !(max_ev > 0.0)) {
    const double trace = sw.trace();
    model.ridge = trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
    sw.diagonal().array() += model.ridge;
    model.regularized = true;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sb, sw);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorKind::kDegenerate, "LDA generalized eigensolver failed");
  }
  const std::size_t m = std::min(k - 1, d);
  model.scalings = Matrix(d, m);
  // eigenvalues ascending: take the last m, largest first
  for (std::size_t j = 0; j < m; ++j) {
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - j);
    model.eigenvalues.push_back(ges.eigenvalues()(col));
    Eigen::VectorXd v = ges.eigenvectors().col(col);
    // deterministic orientation
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    for (std::size_t r = 0; r < d; ++r) model.scalings(r, j) = v(static_cast<Eigen::Index>(r));
  }

  model.projected_means = Matrix(k, m);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < d; ++r) s += means(c, r) * model.scalings(r, j);
      model.projected_means(c, j) = s;
    }
  }
  return model;
}

Matrix LdaModel::transform(const Matrix& x) const {
  if (x.cols() != scalings.rows()) throw Error(ErrorKind::kInvalidArgument, "LDA: feature count mismatch");
  const std::size_t m = scalings.cols();
  Matrix z(x.rows(), m);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < row.size(); ++r) s += row[r] * scalings(r, j);
      z(i, j) = s;
    }
  }
  return z;
}

std::vector<int> LdaModel::predict(const Matrix& x) const {
  const Matrix z = transform(x);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes.size(); ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < z.cols(); ++j) {
        const double diff = z(i, j) - projected_means(c, j);
        dist += diff * diff;
      }
      const double score = -0.5 * dist + log_priors[c];
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    out[i] = classes[best];
  }
  return out;
}

}  // namespace neuroauth
