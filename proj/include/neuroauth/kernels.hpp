#pragma once

// Data-parallel inner loops of the pipeline. Each kernel has a serial
// reference and an OpenMP version; both compute every output element with
// the same operation order, so their results are bit-identical regardless of
// thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "neuroauth/matrix.hpp"

namespace neuroauth {

struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

enum class KurtosisConvention { kExcess, kRaw };

enum class GramKind { kDot, kSquaredDistance };

inline constexpr std::size_t kFeaturesPerChannel = 6;

namespace kernels {

namespace serial {

// Cascade of biquads, transposed direct form II, zero initial state, applied
// independently to each column of a row-major (time x channels) block.
void sos_filter(std::span<const Biquad> sections, std::span<const double> input,
                std::size_t n_channels, std::span<double> output);

// One feature row (channels * 6) per window start.
void window_features(std::span<const double> samples, std::size_t n_channels,
                     std::span<const std::size_t> starts, std::size_t window_len,
                     KurtosisConvention kurtosis, Matrix& out);

// Symmetric n x n matrix of dot products or squared distances between rows,
// accumulated in double and stored as float.
void gram(const Matrix& x, GramKind kind, std::span<float> out);

// f(q) = sum_i coef[i] * exp(-gamma * |sv_i - q|^2) + bias for every query row.
void rbf_decision(const Matrix& support, std::span<const double> coef, double gamma,
                  double bias, const Matrix& queries, std::span<double> out);

// Row i of the distance table: distance from queries[i] to every train row.
// Squared Euclidean when manhattan is false.
void distance_table(const Matrix& train, const Matrix& queries, bool manhattan,
                    std::span<double> out);

}  // namespace serial

namespace parallel {

void sos_filter(std::span<const Biquad> sections, std::span<const double> input,
                std::size_t n_channels, std::span<double> output);
void window_features(std::span<const double> samples, std::size_t n_channels,
                     std::span<const std::size_t> starts, std::size_t window_len,
                     KurtosisConvention kurtosis, Matrix& out);
void gram(const Matrix& x, GramKind kind, std::span<float> out);
void rbf_decision(const Matrix& support, std::span<const double> coef, double gamma,
                  double bias, const Matrix& queries, std::span<double> out);
void distance_table(const Matrix& train, const Matrix& queries, bool manhattan,
                    std::span<double> out);

}  // namespace parallel

// Shared per-element routines used by both variants.
void filter_channel(std::span<const Biquad> sections, std::span<const double> input,
                    std::size_t n_channels, std::size_t channel, std::span<double> output);
void channel_moments(const double* window, std::size_t n, std::size_t stride,
                     KurtosisConvention kurtosis, double* out6);
double squared_distance(std::span<const double> a, std::span<const double> b);
double manhattan_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace kernels
}  // namespace neuroauth
