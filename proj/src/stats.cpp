#include "neuroauth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "neuroauth/error.hpp"

namespace neuroauth {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::kInvalidArgument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // the fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorKind::kInvalidArgument, "t distribution needs df > 0");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form, fast for small lambda
    const double y = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * y);
      s += term;
      if (term < 1e-17 * s) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * s;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_normality_test(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorKind::kInvalidArgument, "KS normality test needs at least 3 values");
  const double mu = mean_of(sample);
  const double sd = std::sqrt(sum_sq_dev(sample, mu) / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::kDegenerate, "KS normality test on a constant sample");

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf((x[i] - mu) / sd);
    d = std::max({d, static_cast<double>(i + 1) / dn - f, f - static_cast<double>(i) / dn});
  }
  TestResult r;
  r.name = "ks_normality";
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(dn) * d);
  r.n1 = n;
  r.reject_null = r.p_value < kSignificanceLevel;
  r.note =
      "mean and standard deviation estimated from the sample; p-value uses the asymptotic "
      "Kolmogorov distribution without Lilliefors correction, so it is biased upward";
  return r;
}

TestResult t_test_independent(std::span<const double> a, std::span<const double> b, bool welch) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "t test needs at least 2 values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = sum_sq_dev(a, ma) / (na - 1.0);
  const double vb = sum_sq_dev(b, mb) / (nb - 1.0);
  const double diff = ma - mb;

  TestResult r;
  r.name = welch ? "welch_t" : "student_t";
  r.n1 = a.size();
  r.n2 = b.size();
  double se;
  if (welch) {
    const double wa = va / na;
    const double wb = vb / nb;
    se = std::sqrt(wa + wb);
    r.df = (wa + wb) * (wa + wb) / (wa * wa / (na - 1.0) + wb * wb / (nb - 1.0));
  } else {
    r.df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  }
  if (!(se > 0.0)) {
    // both samples constant
    if (diff == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
      r.note = "both samples constant and equal; t undefined, reported as 0";
    } else {
      r.statistic = diff > 0.0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.note = "zero within-sample variance";
    }
    if (welch) r.df = r.n1 + r.n2 - 2.0;
  } else {
    r.statistic = diff / se;
    r.p_value = std::clamp(2.0 * student_t_cdf(-std::abs(r.statistic), r.df), 0.0, 1.0);
  }
  r.reject_null = r.p_value < kSignificanceLevel;
  return r;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kEmptyInput, "summarize on empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  Summary s;
  const double n = static_cast<double>(v.size());
  s.mean = mean_of(values);  // input order, so a reader summing rows in order agrees
  s.minimum = v.front();
  s.maximum = v.back();
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  const double ss = sum_sq_dev(values, s.mean);
  s.std_population = std::sqrt(ss / n);
  s.std_sample = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

}  // namespace neuroauth
