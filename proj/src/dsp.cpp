#include "neuroauth/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "neuroauth/error.hpp"

namespace neuroauth {

using cplx = std::complex<double>;

void BandpassSpec::validate() const {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::kInvalidArgument, "sample rate must be positive");
  if (!(low_cut_hz > 0.0 && low_cut_hz < high_cut_hz && high_cut_hz < sample_rate_hz / 2.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "cutoff out of range: need 0 < low < high < fs/2 (low=" + std::to_string(low_cut_hz) +
                    ", high=" + std::to_string(high_cut_hz) + ", fs=" +
                    std::to_string(sample_rate_hz) + ")");
  }
  if (order < 2 || order % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "filter order must be a positive even integer");
  }
}

cplx FilterRealization::response(double freq_hz, double sample_rate_hz) const {
  const cplx z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate_hz);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (s.a[0] + s.a[1] * z1 + s.a[2] * z2);
  }
  return h;
}

double FilterRealization::magnitude(double freq_hz, double sample_rate_hz) const {
  return std::abs(response(freq_hz, sample_rate_hz));
}

bool FilterRealization::is_stable() const {
  // z^2 + a1 z + a2 has both roots inside the unit circle iff |a2| < 1 and |a1| < 1 + a2.
  return std::all_of(sections.begin(), sections.end(), [](const Biquad& s) {
    return std::abs(s.a[2]) < 1.0 && std::abs(s.a[1]) < 1.0 + s.a[2];
  });
}

FilterRealization design_bandpass(const BandpassSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs2 = 2.0 * spec.sample_rate_hz;
  // pre-warped analog band edges
  const double w_lo = fs2 * std::tan(std::numbers::pi * spec.low_cut_hz / spec.sample_rate_hz);
  const double w_hi = fs2 * std::tan(std::numbers::pi * spec.high_cut_hz / spec.sample_rate_hz);
  const double bw = w_hi - w_lo;
  const double w0 = std::sqrt(w_lo * w_hi);

  // Prototype poles in the upper half plane; their conjugates complete the set.
  std::vector<cplx> digital_poles;
  for (int k = 1; k <= n / 2; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n));
    // low-pass -> band-pass: s^2 - p*bw*s + w0^2 = 0
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - w0 * w0);
    for (const cplx s : {half + disc, half - disc}) {
      const cplx z = (fs2 + s) / (fs2 - s);
      // Upper-half-plane prototype poles can map to either half; keep one
      // representative per conjugate pair.
      digital_poles.push_back(z.imag() >= 0.0 ? z : std::conj(z));
    }
  }
  std::sort(digital_poles.begin(), digital_poles.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });

  FilterRealization f;
  for (const cplx& z : digital_poles) {
    Biquad s;
    s.b = {1.0, 0.0, -1.0};  // zeros at z = 1 and z = -1
    s.a = {1.0, -2.0 * z.real(), std::norm(z)};
    f.sections.push_back(s);
  }

  // Unity gain at the digital image of the geometric centre frequency.
  const double center_hz =
      spec.sample_rate_hz / std::numbers::pi * std::atan(w0 / fs2);
  const double g = 1.0 / f.magnitude(center_hz, spec.sample_rate_hz);
  const double per_section = std::pow(g, 1.0 / static_cast<double>(f.sections.size()));
  for (auto& s : f.sections) {
    for (auto& b : s.b) b *= per_section;
  }
  if (!f.is_stable()) throw Error(ErrorKind::kUnstableFilter, "designed band-pass is unstable");
  return f;
}

SessionRecord apply_filter(const FilterRealization& filter, const SessionRecord& record) {
  SessionRecord out = record;
  kernels::parallel::sos_filter(filter.sections, record.samples, record.n_channels(), out.samples);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (!std::isfinite(out.samples[i])) {
      throw Error(ErrorKind::kUnstableFilter,
                  "non-finite filter output at row " + std::to_string(i / out.n_channels()));
    }
  }
  return out;
}

void WindowSpec::validate() const {
  if (window_len_samples == 0 || hop_samples == 0) {
    throw Error(ErrorKind::kInvalidArgument, "window length and hop must be positive");
  }
  if (hop_samples > window_len_samples) {
    throw Error(ErrorKind::kInvalidArgument, "hop must not exceed the window length");
  }
}

WindowSpec WindowSpec::from_milliseconds(double window_ms, std::size_t hop_samples,
                                         double sample_rate_hz) {
  WindowSpec w;
  w.window_len_samples = static_cast<std::size_t>(std::llround(window_ms * sample_rate_hz / 1000.0));
  w.hop_samples = hop_samples;
  w.validate();
  return w;
}

std::size_t window_count(std::size_t n_samples, const WindowSpec& spec) {
  if (n_samples < spec.window_len_samples) return 0;
  return (n_samples - spec.window_len_samples) / spec.hop_samples + 1;
}

WindowedSession::WindowedSession(std::shared_ptr<const SessionRecord> record,
                                 std::vector<std::size_t> starts, std::size_t window_len)
    : record_(std::move(record)), starts_(std::move(starts)), window_len_(window_len) {}

std::span<const double> WindowedSession::window(std::size_t i) const {
  const std::size_t nc = record_->n_channels();
  return std::span<const double>(record_->samples).subspan(starts_[i] * nc, window_len_ * nc);
}

WindowedSession segment_windows(std::shared_ptr<const SessionRecord> record,
                                const WindowSpec& spec) {
  spec.validate();
  const std::size_t count = window_count(record->n_samples(), spec);
  std::vector<std::size_t> starts(count);
  for (std::size_t i = 0; i < count; ++i) starts[i] = i * spec.hop_samples;
  return WindowedSession(std::move(record), std::move(starts), spec.window_len_samples);
}

}  // namespace neuroauth
