#include "neuroauth/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace neuroauth {

namespace kernels {

void filter_channel(std::span<const Biquad> sections, std::span<const double> input,
                    std::size_t n_channels, std::size_t channel, std::span<double> output) {
  const std::size_t n = input.size() / n_channels;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = input[t * n_channels + channel];
  for (const Biquad& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double in = x[t];
      const double y = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[1] * y + z2;
      z2 = s.b[2] * in - s.a[2] * y;
      x[t] = y;
    }
  }
  for (std::size_t t = 0; t < n; ++t) output[t * n_channels + channel] = x[t];
}

void channel_moments(const double* window, std::size_t n, std::size_t stride,
                     KurtosisConvention kurtosis, double* out6) {
  const double dn = static_cast<double>(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = window[i * stride];
    sum += x;
    sum_sq += x * x;
    sum_abs += std::abs(x);
  }
  const double mean = sum / dn;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = window[i * stride] - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;
  out6[0] = mean;
  out6[1] = std::sqrt(m2);
  out6[2] = std::sqrt(sum_sq / dn);
  out6[3] = sum_abs / dn;
  if (m2 > 0.0) {
    out6[4] = m3 / (m2 * std::sqrt(m2));
    out6[5] = m4 / (m2 * m2) - (kurtosis == KurtosisConvention::kExcess ? 3.0 : 0.0);
  } else {
    out6[4] = 0.0;
    out6[5] = 0.0;
  }
}

namespace {

// Four interleaved partial sums combined as (s0 + s1) + (s2 + s3); the order
// is fixed, so every caller sees the same rounding.
template <typename Term>
double reduce4(std::size_t n, Term term) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += term(k);
    s1 += term(k + 1);
    s2 += term(k + 2);
    s3 += term(k + 3);
  }
  for (; k < n; ++k) s0 += term(k);
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  return reduce4(a.size(), [=](std::size_t k) {
    const double d = pa[k] - pb[k];
    return d * d;
  });
}

double manhattan_distance(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  return reduce4(a.size(), [=](std::size_t k) { return std::abs(pa[k] - pb[k]); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  return reduce4(a.size(), [=](std::size_t k) { return pa[k] * pb[k]; });
}

namespace {

void window_row(std::span<const double> samples, std::size_t n_channels, std::size_t start,
                std::size_t window_len, KurtosisConvention kurtosis, std::span<double> row) {
  const double* base = samples.data() + start * n_channels;
  for (std::size_t c = 0; c < n_channels; ++c) {
    channel_moments(base + c, window_len, n_channels, kurtosis, row.data() + c * kFeaturesPerChannel);
  }
}

// Fills row i from the diagonal onward and mirrors into the lower triangle;
// every cell is written by exactly one row.
void gram_row(const Matrix& x, GramKind kind, std::size_t i, std::span<float> out) {
  const std::size_t n = x.rows();
  const auto xi = x.row(i);
  for (std::size_t j = i; j < n; ++j) {
    const double v = kind == GramKind::kDot ? dot(xi, x.row(j)) : squared_distance(xi, x.row(j));
    out[i * n + j] = static_cast<float>(v);
    out[j * n + i] = static_cast<float>(v);
  }
}

double rbf_value(const Matrix& support, std::span<const double> coef, double gamma, double bias,
                 std::span<const double> q) {
  double f = 0.0;
  for (std::size_t s = 0; s < support.rows(); ++s) {
    f += coef[s] * std::exp(-gamma * squared_distance(support.row(s), q));
  }
  return f + bias;
}

void distance_row(const Matrix& train, std::span<const double> q, bool manhattan,
                  std::span<double> out) {
  for (std::size_t j = 0; j < train.rows(); ++j) {
    out[j] = manhattan ? manhattan_distance(train.row(j), q) : squared_distance(train.row(j), q);
  }
}

void check_shapes(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("kernel: column count mismatch");
}

}  // namespace

namespace serial {

void sos_filter(std::span<const Biquad> sections, std::span<const double> input,
                std::size_t n_channels, std::span<double> output) {
  for (std::size_t c = 0; c < n_channels; ++c) filter_channel(sections, input, n_channels, c, output);
}

void window_features(std::span<const double> samples, std::size_t n_channels,
                     std::span<const std::size_t> starts, std::size_t window_len,
                     KurtosisConvention kurtosis, Matrix& out) {
  out = Matrix(starts.size(), n_channels * kFeaturesPerChannel);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    window_row(samples, n_channels, starts[w], window_len, kurtosis, out.row(w));
  }
}

void gram(const Matrix& x, GramKind kind, std::span<float> out) {
  for (std::size_t i = 0; i < x.rows(); ++i) gram_row(x, kind, i, out);
}

void rbf_decision(const Matrix& support, std::span<const double> coef, double gamma,
                  double bias, const Matrix& queries, std::span<double> out) {
  if (support.rows() > 0) check_shapes(support, queries);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out[i] = rbf_value(support, coef, gamma, bias, queries.row(i));
  }
}

void distance_table(const Matrix& train, const Matrix& queries, bool manhattan,
                    std::span<double> out) {
  check_shapes(train, queries);
  const std::size_t n = train.rows();
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    distance_row(train, queries.row(i), manhattan, out.subspan(i * n, n));
  }
}

}  // namespace serial

namespace parallel {

void sos_filter(std::span<const Biquad> sections, std::span<const double> input,
                std::size_t n_channels, std::span<double> output) {
  const long long nc = static_cast<long long>(n_channels);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < nc; ++c) {
    filter_channel(sections, input, n_channels, static_cast<std::size_t>(c), output);
  }
}

void window_features(std::span<const double> samples, std::size_t n_channels,
                     std::span<const std::size_t> starts, std::size_t window_len,
                     KurtosisConvention kurtosis, Matrix& out) {
  out = Matrix(starts.size(), n_channels * kFeaturesPerChannel);
  const long long nw = static_cast<long long>(starts.size());
#pragma omp parallel for schedule(static)
  for (long long w = 0; w < nw; ++w) {
    const auto i = static_cast<std::size_t>(w);
    window_row(samples, n_channels, starts[i], window_len, kurtosis, out.row(i));
  }
}

void gram(const Matrix& x, GramKind kind, std::span<float> out) {
  const long long n = static_cast<long long>(x.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < n; ++i) gram_row(x, kind, static_cast<std::size_t>(i), out);
}

void rbf_decision(const Matrix& support, std::span<const double> coef, double gamma,
                  double bias, const Matrix& queries, std::span<double> out) {
  if (support.rows() > 0) check_shapes(support, queries);
  const long long n = static_cast<long long>(queries.rows());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out[r] = rbf_value(support, coef, gamma, bias, queries.row(r));
  }
}

void distance_table(const Matrix& train, const Matrix& queries, bool manhattan,
                    std::span<double> out) {
  check_shapes(train, queries);
  const std::size_t n = train.rows();
  const long long nq = static_cast<long long>(queries.rows());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < nq; ++i) {
    const auto r = static_cast<std::size_t>(i);
    distance_row(train, queries.row(r), manhattan, out.subspan(r * n, n));
  }
}

}  // namespace parallel
}  // namespace kernels
}  // namespace neuroauth
