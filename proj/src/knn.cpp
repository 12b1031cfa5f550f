#include "neuroauth/knn.hpp"

#include <algorithm>
#include <map>

#include "neuroauth/error.hpp"
#include "neuroauth/kernels.hpp"

namespace neuroauth {

namespace {

constexpr std::size_t kQueryBlock = 256;

std::vector<std::size_t> nearest(std::span<const double> dist, std::size_t k) {
  std::vector<std::size_t> idx(dist.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
  idx.resize(k);
  return idx;
}

int vote(std::span<const std::size_t> neighbors, const std::vector<int>& labels) {
  std::map<int, int> votes;  // ordered: first max is the smallest label
  for (auto i : neighbors) ++votes[labels[i]];
  int best_label = 0;
  int best_votes = -1;
  for (const auto& [label, v] : votes) {
    if (v > best_votes) {
      best_votes = v;
      best_label = label;
    }
  }
  return best_label;
}

}  // namespace

KnnModel train_knn(const Matrix& train, std::span<const int> labels, const KnnSpec& spec) {
  if (train.rows() == 0) throw Error(ErrorKind::kEmptyInput, "kNN needs a non-empty training set");
  if (labels.size() != train.rows()) throw Error(ErrorKind::kInvalidArgument, "kNN: label count mismatch");
  if (spec.k < 1 || static_cast<std::size_t>(spec.k) > train.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "kNN: k must lie in [1, training rows]");
  }
  return KnnModel{spec, train, std::vector<int>(labels.begin(), labels.end())};
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> query) const {
  Matrix q(1, query.size(), std::vector<double>(query.begin(), query.end()));
  std::vector<double> dist(train.rows());
  kernels::serial::distance_table(train, q, spec.metric == DistanceMetric::kManhattan, dist);
  return nearest(dist, static_cast<std::size_t>(spec.k));
}

std::vector<int> KnnModel::predict(const Matrix& x) const {
  std::vector<int> out(x.rows());
  const std::size_t n = train.rows();
  const std::size_t k = static_cast<std::size_t>(spec.k);
  std::vector<double> table;
  for (std::size_t start = 0; start < x.rows(); start += kQueryBlock) {
    const std::size_t count = std::min(kQueryBlock, x.rows() - start);
    std::vector<std::size_t> rows(count);
    for (std::size_t i = 0; i < count; ++i) rows[i] = start + i;
    const Matrix block = x.select_rows(rows);
    table.resize(count * n);
    kernels::parallel::distance_table(train, block, spec.metric == DistanceMetric::kManhattan, table);
    for (std::size_t i = 0; i < count; ++i) {
      const auto nn = nearest(std::span<const double>(table).subspan(i * n, n), k);
      out[start + i] = vote(nn, labels);
    }
  }
  return out;
}

}  // namespace neuroauth
