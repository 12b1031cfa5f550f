#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "neuroauth/ingest.hpp"
#include "neuroauth/kernels.hpp"

namespace neuroauth {

struct BandpassSpec {
  double low_cut_hz{0.2};
  double high_cut_hz{45.0};
  int order{4};  // low-pass prototype order; the band-pass has 2 * order poles
  double sample_rate_hz{500.0};

  void validate() const;
};

// Butterworth band-pass as a cascade of second-order sections.
struct FilterRealization {
  std::vector<Biquad> sections;

  std::complex<double> response(double freq_hz, double sample_rate_hz) const;
  double magnitude(double freq_hz, double sample_rate_hz) const;
  bool is_stable() const;
};

FilterRealization design_bandpass(const BandpassSpec& spec);

// Causal single pass over every channel with zero initial state.
SessionRecord apply_filter(const FilterRealization& filter, const SessionRecord& record);

struct WindowSpec {
  std::size_t window_len_samples{125};
  std::size_t hop_samples{63};

  void validate() const;
  static WindowSpec from_milliseconds(double window_ms, std::size_t hop_samples,
                                      double sample_rate_hz);
};

// floor((T - len) / hop) + 1 for T >= len, else 0.
std::size_t window_count(std::size_t n_samples, const WindowSpec& spec);

// Windows are contiguous row blocks of the (shared, immutable) source record.
class WindowedSession {
 public:
  WindowedSession(std::shared_ptr<const SessionRecord> record, std::vector<std::size_t> starts,
                  std::size_t window_len);

  int user_id() const { return record_->user_id; }
  int session_id() const { return record_->session_id; }
  const SessionRecord& record() const { return *record_; }
  const ChannelSet& channels() const { return record_->channels; }
  std::size_t size() const { return starts_.size(); }
  std::size_t window_len() const { return window_len_; }
  const std::vector<std::size_t>& starts() const { return starts_; }

  // window_len x channels, row-major
  std::span<const double> window(std::size_t i) const;

 private:
  std::shared_ptr<const SessionRecord> record_;
  std::vector<std::size_t> starts_;
  std::size_t window_len_;
};

WindowedSession segment_windows(std::shared_ptr<const SessionRecord> record,
                                const WindowSpec& spec);

}  // namespace neuroauth
