#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace neuroauth {

inline constexpr double kSignificanceLevel = 0.05;

struct TestResult {
  std::string name;
  double statistic{0.0};
  double p_value{1.0};
  double df{0.0};  // t tests only
  std::size_t n1{0};
  std::size_t n2{0};
  bool reject_null{false};  // p < 0.05
  std::string note;
};

double normal_cdf(double z);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

// P(sqrt(n) D > lambda) under the asymptotic Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// One-sample KS against a normal with mean and (n-1) standard deviation
// estimated from the sample; the p-value ignores the estimation (no
// Lilliefors correction) and the note says so.
TestResult ks_normality_test(std::span<const double> sample);

// Two-sample t test, pooled variance by default, Welch when requested.
TestResult t_test_independent(std::span<const double> a, std::span<const double> b,
                              bool welch = false);

struct Summary {
  double mean{0.0};
  double maximum{0.0};
  double minimum{0.0};
  double median{0.0};
  double std_population{0.0};
  double std_sample{0.0};
};

Summary summarize(std::span<const double> values);

}  // namespace neuroauth
