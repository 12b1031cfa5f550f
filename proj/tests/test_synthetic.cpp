#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "neuroauth/error.hpp"
#include "neuroauth/random.hpp"
#include "neuroauth/synthetic.hpp"

using namespace neuroauth;

namespace {

SyntheticSpec small(std::uint64_t seed = 42) {
  SyntheticSpec s;
  s.n_users = 2;
  s.n_sessions = 2;
  s.session_seconds = 1.0;
  s.sample_rate_hz = 500.0;
  s.seed = seed;
  return s;
}

// Largest root modulus of z^p - a1 z^(p-1) - ... - ap via the companion matrix.
double spectral_radius(std::span<const double> a) {
  const auto p = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) m(0, k) = a[k];
  for (Eigen::Index k = 1; k < p; ++k) m(k, k - 1) = 1.0;
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("synthetic shape and ordering") {
  const auto recs = generate_synthetic(small());
  REQUIRE(recs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(recs[i].n_samples() == 500);
    CHECK(recs[i].n_channels() == 32);
    CHECK(recs[i].user_id == static_cast<int>(i / 2) + 1);
    CHECK(recs[i].session_id == static_cast<int>(i % 2) + 1);
    CHECK_NOTHROW(recs[i].validate());
  }
}

TEST_CASE("synthetic determinism and seed sensitivity") {
  const auto a = generate_synthetic(small(42));
  const auto b = generate_synthetic(small(42));
  const auto c = generate_synthetic(small(43));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].samples == b[i].samples);
    std::size_t differing = 0;
    for (std::size_t k = 0; k < a[i].samples.size(); ++k) differing += a[i].samples[k] != c[i].samples[k];
    CHECK(differing == a[i].samples.size());
  }
  // single-session generation agrees with the batch
  const auto spec = small(42);
  const auto sig = derive_signatures(spec);
  CHECK(generate_session(spec, sig, 2, 1).samples == a[2].samples);
  CHECK_THROWS_AS(generate_session(spec, sig, 3, 1), Error);
}

TEST_CASE("users get distinct signatures; spread 0 collapses them") {
  SyntheticSpec spec = small();
  spec.n_users = 5;
  const auto sig = derive_signatures(spec);
  for (std::size_t u = 1; u < sig.size(); ++u) {
    CHECK(ar_coefficients(sig[u].channels[0], 500.0) != ar_coefficients(sig[0].channels[0], 500.0));
  }
  spec.signature_spread = 0.0;
  const auto same = derive_signatures(spec);
  for (std::size_t u = 1; u < same.size(); ++u) {
    CHECK(ar_coefficients(same[u].channels[7], 500.0) == ar_coefficients(same[0].channels[7], 500.0));
  }
}

TEST_CASE("Schur-Cohn stability test agrees with companion eigenvalues (property)") {
  Rng rng(77);
  int stable = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> a(1 + rng.below(6));
    for (auto& v : a) v = rng.uniform(-1.8, 1.8);
    const double rho = spectral_radius(a);
    if (std::abs(rho - 1.0) < 1e-9) continue;
    CHECK(is_stable_ar(a) == (rho < 1.0));
    stable += rho < 1.0;
  }
  CHECK(stable > 100);
  CHECK_FALSE(is_stable_ar(std::vector<double>{1.0}));
  CHECK(is_stable_ar(std::vector<double>{0.5}));
  CHECK_FALSE(is_stable_ar(std::vector<double>{NAN, 0.1}));
}

TEST_CASE("derived and drifted AR processes are stable (property)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec = small(seed);
    spec.n_users = 12;
    for (const auto& s : derive_signatures(spec)) {
      for (const auto& ch : s.channels) {
        const auto a = ar_coefficients(ch, spec.sample_rate_hz);
        CHECK(spectral_radius(a) < 1.0);
        CHECK(is_stable_ar(a));
      }
    }
  }
  // heavy drift still generates finite data
  SyntheticSpec wild = small(5);
  wild.session_drift = 1.0;
  wild.n_sessions = 6;
  for (const auto& r : generate_synthetic(wild)) CHECK_NOTHROW(r.validate());
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec s = small();
  s.n_users = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = small();
  s.session_drift = -0.1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = small();
  s.signatures = derive_signatures(s);
  s.signatures[1].channels[3].resonances[0].radius = 1.2;
  try {
    s.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnstableAutoregression);
  }
}

TEST_CASE("background RMS matches the configured gain") {
  SyntheticSpec spec = small();
  spec.n_users = 1;
  spec.n_sessions = 1;
  spec.session_seconds = 200.0;
  spec.session_drift = 0.0;
  spec.signatures = derive_signatures(spec);
  for (auto& ch : spec.signatures[0].channels) ch.alpha_amp = ch.beta_amp = 0.0;
  const auto rec = generate_synthetic(spec).front();
  for (std::size_t c = 0; c < 32; c += 7) {
    double s2 = 0.0;
    for (std::size_t t = 0; t < rec.n_samples(); ++t) s2 += rec.at(t, c) * rec.at(t, c);
    const double rms = std::sqrt(s2 / static_cast<double>(rec.n_samples()));
    CHECK(rms == doctest::Approx(spec.signatures[0].channels[c].gain).epsilon(0.1));
  }
}
