#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroauth/channels.hpp"
#include "neuroauth/dsp.hpp"
#include "neuroauth/matrix.hpp"

namespace neuroauth {

inline constexpr std::array<std::string_view, kFeaturesPerChannel> kFeatureNames = {
    "mean", "std", "rms", "mav", "skew", "kurt"};
inline constexpr std::size_t kNumFeatures = kNumChannels * kFeaturesPerChannel;

struct RowMeta {
  int user_id{0};
  int session_id{0};
  std::size_t window_index{0};
  std::size_t start_sample{0};

  bool operator==(const RowMeta&) const = default;
};

// One row per window, channel-major columns: for each channel the six
// statistics in kFeatureNames order.
struct FeatureMatrix {
  Matrix values;
  std::vector<RowMeta> meta;
  std::vector<std::string> column_names;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_cols(std::span<const std::size_t> indices) const;
  void append(const FeatureMatrix& other);
};

std::vector<std::string> feature_column_names(const ChannelSet& channels);

// `window` is window_len x n_channels, row-major.
std::vector<double> extract_features(std::span<const double> window, std::size_t n_channels,
                                     KurtosisConvention kurtosis = KurtosisConvention::kExcess);

FeatureMatrix build_feature_matrix(std::span<const WindowedSession> sessions,
                                   KurtosisConvention kurtosis = KurtosisConvention::kExcess);

// Per-column min-max scaling fitted on training rows only.
struct Normalizer {
  std::vector<double> minimum;
  std::vector<double> maximum;

  FeatureMatrix apply(const FeatureMatrix& m) const;
  void apply_in_place(Matrix& m) const;

  bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(const FeatureMatrix& train);

// features.csv (header of column names) plus features.meta.csv (row metadata).
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& dir);
FeatureMatrix read_feature_matrix(const std::filesystem::path& dir);

}  // namespace neuroauth
