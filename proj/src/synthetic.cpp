#include "neuroauth/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "neuroauth/error.hpp"
#include "neuroauth/parallel.hpp"
#include "neuroauth/random.hpp"

namespace neuroauth {

namespace {

constexpr double kBaseGainUv = 10.0;
constexpr std::size_t kBurnIn = 512;

// Stationary standard deviation of the AR process driven by unit white noise.
double ar_unit_response_rms(const std::array<double, kArOrder>& a) {
  std::array<double, kArOrder> h{};  // h[t-1], h[t-2], ...
  double energy = 0.0;
  double value = 1.0;
  for (int t = 0; t < 20000; ++t) {
    if (t > 0) {
      value = 0.0;
      for (std::size_t k = 0; k < kArOrder; ++k) value += a[k] * h[k];
    }
    for (std::size_t k = kArOrder - 1; k > 0; --k) h[k] = h[k - 1];
    h[0] = value;
    energy += value * value;
    if (t > 64 && value * value < 1e-18 * energy) break;
  }
  return std::sqrt(energy);
}

std::array<double, kArOrder> ar_from_resonances(double r1, double f1, double r2, double f2,
                                                double fs) {
  const double p1 = 2.0 * r1 * std::cos(2.0 * std::numbers::pi * f1 / fs);
  const double q1 = r1 * r1;
  const double p2 = 2.0 * r2 * std::cos(2.0 * std::numbers::pi * f2 / fs);
  const double q2 = r2 * r2;
  // (1 - p1 z^-1 + q1 z^-2)(1 - p2 z^-1 + q2 z^-2) = 1 - a1 z^-1 - a2 z^-2 - ...
  return {p1 + p2, -(q1 + q2 + p1 * p2), p1 * q2 + p2 * q1, -q1 * q2};
}

}  // namespace

std::array<double, kArOrder> ar_coefficients(const ChannelSignature& ch, double sample_rate_hz) {
  return ar_from_resonances(ch.resonances[0].radius, ch.resonances[0].freq_hz, ch.resonances[1].radius,
                            ch.resonances[1].freq_hz, sample_rate_hz);
}

void SyntheticSpec::validate() const {
  if (n_users < 1 || n_sessions < 1) {
    throw Error(ErrorKind::kInvalidConfig, "synthetic spec needs >= 1 user and session");
  }
  if (!(session_seconds > 0.0) || !(sample_rate_hz > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "synthetic duration and sample rate must be positive");
  }
  if (!(session_drift >= 0.0) || !(signature_spread >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "session_drift and signature_spread must be >= 0");
  }
  if (!signatures.empty()) {
    if (signatures.size() != static_cast<std::size_t>(n_users)) {
      throw Error(ErrorKind::kInvalidConfig, "explicit signatures must list one entry per user");
    }
    for (std::size_t u = 0; u < signatures.size(); ++u) {
      if (signatures[u].channels.size() != kNumChannels) {
        throw Error(ErrorKind::kInvalidConfig,
                    "signature of user " + std::to_string(u + 1) + " must have 32 channels");
      }
      for (const auto& ch : signatures[u].channels) {
        bool ok = true;
        for (const auto& r : ch.resonances) ok = ok && r.radius > 0.0 && r.radius < 1.0;
        if (!ok || !is_stable_ar(ar_coefficients(ch, sample_rate_hz))) {
          throw Error(ErrorKind::kUnstableAutoregression,
                      "unstable AR coefficients in signature of user " + std::to_string(u + 1));
        }
      }
    }
  }
}

bool is_stable_ar(std::span<const double> coefficients) {
  // Monic polynomial A(z) = 1 + c1 z^-1 + ... + cp z^-p with c = -a.
  std::vector<double> c(coefficients.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(coefficients[i])) return false;
    c[i] = -coefficients[i];
  }
  for (std::size_t p = c.size(); p > 0; --p) {
    const double k = c[p - 1];
    if (std::abs(k) >= 1.0) return false;
    const double denom = 1.0 - k * k;
    std::vector<double> next(p - 1);
    for (std::size_t i = 0; i + 1 < p; ++i) next[i] = (c[i] - k * c[p - 2 - i]) / denom;
    c = std::move(next);
  }
  return true;
}

std::vector<UserSignature> derive_signatures(const SyntheticSpec& spec) {
  std::vector<UserSignature> out;
  out.reserve(spec.n_users);
  const double fs = spec.sample_rate_hz;
  const double nyq_cap = 0.45 * fs;
  for (int u = 1; u <= spec.n_users; ++u) {
    // spread = 0 collapses every user onto the user-1 stream
    const std::uint64_t user_key = spec.signature_spread > 0.0 ? static_cast<std::uint64_t>(u) : 1;
    Rng rng(derive_seed(spec.seed, "synth-signature", {user_key}));
    UserSignature sig;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      ChannelSignature ch;
      const double s = spec.signature_spread;
      const double r1 = 0.85 + 0.12 * rng.uniform();
      const double f1 = std::min(2.0 + 10.0 * rng.uniform(), nyq_cap);
      const double r2 = 0.60 + 0.30 * rng.uniform();
      const double f2 = std::min(12.0 + 23.0 * rng.uniform(), nyq_cap);
      ch.resonances = {Resonance{r1, f1}, Resonance{r2, f2}};
      ch.gain = kBaseGainUv * std::exp(s * 0.35 * rng.normal());
      ch.alpha_hz = std::min(8.0 + 5.0 * rng.uniform(), nyq_cap);
      ch.alpha_amp = ch.gain * (0.2 + 0.8 * rng.uniform());
      ch.beta_hz = std::min(13.0 + 17.0 * rng.uniform(), nyq_cap);
      ch.beta_amp = ch.gain * (0.1 + 0.5 * rng.uniform());
      sig.channels.push_back(ch);
    }
    out.push_back(std::move(sig));
  }
  return out;
}

std::size_t synthetic_session_samples(const SyntheticSpec& spec) {
  const auto n = static_cast<std::size_t>(std::llround(spec.session_seconds * spec.sample_rate_hz));
  if (n == 0) throw Error(ErrorKind::kInvalidConfig, "synthetic session has no samples");
  return n;
}

SessionRecord generate_session(const SyntheticSpec& spec, std::span<const UserSignature> signatures, int user,
                               int session) {
  if (user < 1 || user > spec.n_users || session < 1 || session > spec.n_sessions) {
    throw Error(ErrorKind::kUnknownSession, "synthetic session (" + std::to_string(user) + ", " +
                                                std::to_string(session) + ") is outside the spec");
  }
  if (signatures.size() != static_cast<std::size_t>(spec.n_users)) {
    throw Error(ErrorKind::kInvalidArgument, "one signature per synthetic user is required");
  }
  const std::size_t n_samples = synthetic_session_samples(spec);
  const UserSignature& sig = signatures[user - 1];
  Rng drift_rng(derive_seed(spec.seed, "synth-drift", {static_cast<std::uint64_t>(user),
                                                       static_cast<std::uint64_t>(session)}));
  Rng noise_rng(derive_seed(spec.seed, "synth-noise", {static_cast<std::uint64_t>(user),
                                                       static_cast<std::uint64_t>(session)}));

  SessionRecord rec;
  rec.user_id = user;
  rec.session_id = session;
  rec.sample_rate_hz = spec.sample_rate_hz;
  rec.samples.assign(n_samples * kNumChannels, 0.0);

  for (std::size_t c = 0; c < kNumChannels; ++c) {
    ChannelSignature ch = sig.channels[c];
    if (spec.session_drift > 0.0) {
      for (auto& r : ch.resonances) {
        // logit-domain jitter keeps the radius inside (0, 1) for any drift
        const double logit = std::log(r.radius / (1.0 - r.radius)) + drift_rng.normal(0.0, spec.session_drift);
        r.radius = 1.0 / (1.0 + std::exp(-logit));
        r.freq_hz = std::min(r.freq_hz * std::exp(drift_rng.normal(0.0, spec.session_drift)),
                             0.45 * spec.sample_rate_hz);
      }
      ch.gain *= std::exp(drift_rng.normal(0.0, spec.session_drift));
      ch.alpha_amp *= std::exp(drift_rng.normal(0.0, spec.session_drift));
      ch.beta_amp *= std::exp(drift_rng.normal(0.0, spec.session_drift));
    }
    const std::array<double, kArOrder> ar = ar_coefficients(ch, spec.sample_rate_hz);
    if (!is_stable_ar(ar)) {
      throw Error(ErrorKind::kUnstableAutoregression,
                  "unstable AR coefficients for user " + std::to_string(user) + ", channel " + std::to_string(c));
    }
    const double scale = ch.gain / ar_unit_response_rms(ar);
    const double alpha_phase = 2.0 * std::numbers::pi * noise_rng.uniform();
    const double beta_phase = 2.0 * std::numbers::pi * noise_rng.uniform();
    const double w_alpha = 2.0 * std::numbers::pi * ch.alpha_hz / spec.sample_rate_hz;
    const double w_beta = 2.0 * std::numbers::pi * ch.beta_hz / spec.sample_rate_hz;

    std::array<double, kArOrder> hist{};
    for (std::size_t t = 0; t < kBurnIn + n_samples; ++t) {
      double x = noise_rng.normal();
      for (std::size_t k = 0; k < kArOrder; ++k) x += ar[k] * hist[k];
      for (std::size_t k = kArOrder - 1; k > 0; --k) hist[k] = hist[k - 1];
      hist[0] = x;
      if (t < kBurnIn) continue;
      const std::size_t i = t - kBurnIn;
      const double di = static_cast<double>(i);
      rec.samples[i * kNumChannels + c] = scale * x +
                                          ch.alpha_amp * std::sin(w_alpha * di + alpha_phase) +
                                          ch.beta_amp * std::sin(w_beta * di + beta_phase);
    }
  }
  return rec;
}

std::vector<SessionRecord> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::vector<UserSignature> signatures =
      spec.signatures.empty() ? derive_signatures(spec) : spec.signatures;
  synthetic_session_samples(spec);
  const std::size_t total = static_cast<std::size_t>(spec.n_users) * spec.n_sessions;
  std::vector<SessionRecord> records(total);
  parallel_for(total, [&](std::size_t idx) {
    const int user = static_cast<int>(idx / spec.n_sessions) + 1;
    const int session = static_cast<int>(idx % spec.n_sessions) + 1;
    records[idx] = generate_session(spec, signatures, user, session);
  });
  return records;
}

}  // namespace neuroauth
