#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neuroauth/channels.hpp"

namespace neuroauth {

// One user-session of multichannel EEG. Samples are row-major: time x channel.
struct SessionRecord {
  int user_id{0};
  int session_id{0};
  double sample_rate_hz{500.0};
  ChannelSet channels;
  std::vector<double> samples;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return n_channels() == 0 ? 0 : samples.size() / n_channels(); }
  double at(std::size_t t, std::size_t c) const { return samples[t * n_channels() + c]; }
  std::span<const double> row(std::size_t t) const {
    return {samples.data() + t * n_channels(), n_channels()};
  }

  // Throws on shape mismatch or non-finite values.
  void validate() const;
};

struct ManifestEntry {
  int user_id{0};
  int session_id{0};
  std::string path;  // relative to the manifest root
  std::size_t sample_count{0};
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  std::filesystem::path root;
  double sample_rate_hz{500.0};
  std::vector<ManifestEntry> entries;  // sorted by (user, session)

  const ManifestEntry& find(int user_id, int session_id) const;
  std::vector<int> users() const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string session_file_name(int user_id, int session_id);

SessionRecord load_session(const DatasetManifest& manifest, int user_id, int session_id);

// Canonical CSV: header of channel labels, one row per sample, shortest
// round-trip decimal representation.
SessionRecord read_session_csv(const std::filesystem::path& path, int user_id, int session_id,
                               double sample_rate_hz);
void write_session_csv(const SessionRecord& record, const std::filesystem::path& path);

enum class CountStage { kPreProcessing, kPostProcessing };

struct SessionCount {
  int user_id{0};
  int session_id{0};
  std::size_t count{0};
};

struct DatasetStats {
  CountStage stage{CountStage::kPreProcessing};
  std::size_t entries{0};
  std::size_t total{0};
  double average{0.0};
  double median{0.0};
  std::size_t minimum{0};
  std::size_t maximum{0};
  double std_population{0.0};
  double std_sample{0.0};
};

DatasetStats dataset_stats(std::span<const SessionCount> counts, CountStage stage);

// Sums per-session counts into one entry per user (session_id set to 0).
std::vector<SessionCount> group_counts_by_user(std::span<const SessionCount> counts);

const char* to_string(CountStage stage);

}  // namespace neuroauth
