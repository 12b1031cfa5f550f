#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "neuroauth/ingest.hpp"

namespace neuroauth {

inline constexpr std::size_t kArOrder = 4;

// One complex-conjugate pole pair of the AR(4) background.
struct Resonance {
  double radius{0.9};  // in (0, 1)
  double freq_hz{10.0};
};

// Per-channel generative parameters: AR(4) background (two resonances) scaled
// to `gain` microvolts RMS, plus one alpha-band and one beta-band sinusoid.
struct ChannelSignature {
  std::array<Resonance, 2> resonances{};
  double gain{10.0};
  double alpha_hz{10.0};
  double alpha_amp{0.0};
  double beta_hz{20.0};
  double beta_amp{0.0};
};

// x[t] = sum_k a[k] * x[t-1-k] + e[t]
std::array<double, kArOrder> ar_coefficients(const ChannelSignature& ch, double sample_rate_hz);

struct UserSignature {
  std::vector<ChannelSignature> channels;  // one per channel
};

struct SyntheticSpec {
  int n_users{12};
  int n_sessions{9};
  double session_seconds{60.0};
  double sample_rate_hz{500.0};
  std::uint64_t seed{42};
  // Per-session Gaussian jitter (this standard deviation) of every
  // resonance's logit radius and log frequency, and of the log gains.
  double session_drift{0.02};
  // Scales between-user variability of derived signatures; 0 makes all
  // users share one signature.
  double signature_spread{1.0};
  // Explicit signatures, one per user. Derived from `seed` when empty.
  std::vector<UserSignature> signatures;

  void validate() const;
};

// True when every root of z^p - a1 z^(p-1) - ... - ap lies strictly inside the
// unit circle (Schur-Cohn step-down recursion).
bool is_stable_ar(std::span<const double> coefficients);

std::vector<UserSignature> derive_signatures(const SyntheticSpec& spec);

// n_users * n_sessions records ordered by (user, session), users and sessions
// numbered from 1.
std::vector<SessionRecord> generate_synthetic(const SyntheticSpec& spec);

std::size_t synthetic_session_samples(const SyntheticSpec& spec);

// One record of generate_synthetic; identical to the batch output.
SessionRecord generate_session(const SyntheticSpec& spec, std::span<const UserSignature> signatures,
                               int user, int session);

}  // namespace neuroauth
