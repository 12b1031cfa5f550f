#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace neuroauth {

inline constexpr std::size_t kNumChannels = 32;

// Electrode order of the WAY-EEG-GAL Acti-cap recordings.
inline constexpr std::array<std::string_view, kNumChannels> kDefaultChannelLabels = {
    "Fp1", "Fp2", "F7",  "F3",   "Fz",  "F4",  "F8",  "FC5", "FC1", "FC2", "FC6",
    "T7",  "C3",  "Cz",  "C4",   "T8",  "TP9", "CP5", "CP1", "CP2", "CP6", "TP10",
    "P7",  "P3",  "Pz",  "P4",   "P8",  "PO9", "O1",  "Oz",  "O2",  "PO10"};

class ChannelSet {
 public:
  ChannelSet();
  explicit ChannelSet(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& operator[](std::size_t i) const { return labels_[i]; }

  bool operator==(const ChannelSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

}  // namespace neuroauth
