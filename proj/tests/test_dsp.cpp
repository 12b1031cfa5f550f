#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "neuroauth/dsp.hpp"
#include "neuroauth/error.hpp"
#include "neuroauth/random.hpp"

using namespace neuroauth;

namespace {

double db(double mag) { return 20.0 * std::log10(mag); }

// Analog Butterworth band-pass magnitude at the pre-warped frequency. The
// bilinear transform maps it exactly onto the digital response.
double analog_oracle(double f, const BandpassSpec& s) {
  const double fs = s.sample_rate_hz;
  auto warp = [&](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w = warp(f), lo = warp(s.low_cut_hz), hi = warp(s.high_cut_hz);
  const double w0sq = lo * hi, bw = hi - lo;
  const double x = (w * w - w0sq) / (w * bw);
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, s.order));
}

SessionRecord one_channel_signal(const std::vector<double>& x) {
  SessionRecord r;
  r.user_id = 1;
  r.session_id = 1;
  r.samples.assign(x.size() * kNumChannels, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) r.samples[t * kNumChannels] = x[t];
  return r;
}

}  // namespace

TEST_CASE("default band-pass magnitude targets") {
  const BandpassSpec spec;
  const FilterRealization f = design_bandpass(spec);
  CHECK(f.sections.size() == 4);
  CHECK(f.is_stable());
  CHECK(std::abs(db(f.magnitude(10.0, 500.0))) <= 1.0);
  CHECK(f.magnitude(0.0, 500.0) == 0.0);  // numerator zero at z = 1 is exact
  CHECK(db(f.magnitude(100.0, 500.0)) <= -20.0);
  // frozen reference values (scipy.signal.butter(4, [0.2, 45], 'bandpass', fs=500))
  CHECK(std::abs(db(f.magnitude(10.0, 500.0)) - (-1.0027e-5)) < 1e-8);
  CHECK(std::abs(db(f.magnitude(100.0, 500.0)) - (-31.9753040)) < 1e-6);
  CHECK(f.magnitude(250.0, 500.0) < 1e-12);
}

TEST_CASE("digital response equals the analog prototype under pre-warping") {
  for (int order : {2, 4, 6, 8}) {
    const BandpassSpec spec{0.2, 45.0, order, 500.0};
    const FilterRealization f = design_bandpass(spec);
    CHECK(f.sections.size() == static_cast<std::size_t>(order));
    for (double hz = 0.05; hz < 249.0; hz *= 1.07) {
      CHECK(std::abs(f.magnitude(hz, 500.0) - analog_oracle(hz, spec)) < 1e-8);
    }
  }
  const BandpassSpec narrow{8.0, 13.0, 4, 256.0};
  const FilterRealization g = design_bandpass(narrow);
  for (double hz = 0.5; hz < 127.0; hz += 0.5) CHECK(std::abs(g.magnitude(hz, 256.0) - analog_oracle(hz, narrow)) < 1e-8);
  // unity gain at the geometric band centre (digital image)
  const double fc = 256.0 / std::numbers::pi *
                    std::atan(std::sqrt(std::tan(std::numbers::pi * 8.0 / 256.0) * std::tan(std::numbers::pi * 13.0 / 256.0)));
  CHECK(g.magnitude(fc, 256.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("second order is too gentle for -20 dB at 100 Hz") {
  const FilterRealization f = design_bandpass({0.2, 45.0, 2, 500.0});
  CHECK(std::abs(db(f.magnitude(100.0, 500.0)) - (-16.09)) < 0.01);
}

TEST_CASE("band-pass spec validation") {
  CHECK_THROWS_AS(design_bandpass({45.0, 0.2, 4, 500.0}), Error);
  CHECK_THROWS_AS(design_bandpass({0.2, 250.0, 4, 500.0}), Error);
  CHECK_THROWS_AS(design_bandpass({0.0, 45.0, 4, 500.0}), Error);
  CHECK_THROWS_AS(design_bandpass({0.2, 45.0, 3, 500.0}), Error);
  CHECK_THROWS_AS(design_bandpass({0.2, 45.0, 0, 500.0}), Error);
  CHECK_THROWS_AS(design_bandpass({0.2, 45.0, 4, -1.0}), Error);
}

TEST_CASE("filtered sinusoid settles to |H| and arg H") {
  const BandpassSpec spec;
  const FilterRealization f = design_bandpass(spec);
  for (double hz : {3.0, 10.0, 40.0, 80.0}) {
    const std::size_t n = 40000;
    const double w = 2.0 * std::numbers::pi * hz / 500.0;
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = std::sin(w * static_cast<double>(t));
    const SessionRecord y = apply_filter(f, one_channel_signal(x));
    const std::complex<double> h = f.response(hz, 500.0);
    for (std::size_t t = n - 200; t < n; ++t) {
      const double expect = std::abs(h) * std::sin(w * static_cast<double>(t) + std::arg(h));
      CHECK(std::abs(y.at(t, 0) - expect) < 1e-6);
      CHECK(y.at(t, 1) == 0.0);
    }
  }
}

TEST_CASE("constant input decays to zero") {
  const FilterRealization f = design_bandpass({});
  const SessionRecord y = apply_filter(f, one_channel_signal(std::vector<double>(20000, 5.0)));
  double tail = 0.0;
  for (std::size_t t = 19900; t < 20000; ++t) tail = std::max(tail, std::abs(y.at(t, 0)));
  CHECK(tail < 1e-6);
  // the 0.2 Hz edge decays slowly: after 10 s the residual is still ~1.7e-2
  double mid = 0.0;
  for (std::size_t t = 4900; t < 5000; ++t) mid = std::max(mid, std::abs(y.at(t, 0)));
  CHECK(std::abs(mid - 0.0171) < 1e-3);
}

TEST_CASE("non-finite filter output is reported") {
  std::vector<double> x(100, 0.0);
  x[10] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(apply_filter(design_bandpass({}), one_channel_signal(x)), Error);
}

TEST_CASE("window count formula on randomized cases (property)") {
  Rng rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t len = 1 + rng.below(400);
    const std::size_t hop = 1 + rng.below(len);
    const std::size_t total = rng.below(3000);
    const WindowSpec spec{len, hop};
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + len <= total; s += hop) starts.push_back(s);
    REQUIRE(window_count(total, spec) == starts.size());
    if (total >= len) CHECK(window_count(total, spec) == (total - len) / hop + 1);
  }
}

TEST_CASE("segment_windows exposes contiguous row blocks") {
  SessionRecord r;
  r.user_id = 3;
  r.session_id = 2;
  const std::size_t n = 1000;
  r.samples.resize(n * kNumChannels);
  for (std::size_t i = 0; i < r.samples.size(); ++i) r.samples[i] = static_cast<double>(i);
  auto shared = std::make_shared<const SessionRecord>(r);
  const WindowedSession w = segment_windows(shared, WindowSpec{});
  CHECK(w.size() == (n - 125) / 63 + 1);
  CHECK(w.user_id() == 3);
  CHECK(w.session_id() == 2);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto win = w.window(k);
    REQUIRE(win.size() == 125 * kNumChannels);
    CHECK(win[0] == r.at(k * 63, 0));
    CHECK(win.data() == shared->samples.data() + k * 63 * kNumChannels);  // a view, no copy
  }
  auto tiny = std::make_shared<SessionRecord>(r);
  tiny->samples.resize(100 * kNumChannels);
  CHECK(segment_windows(tiny, WindowSpec{}).size() == 0);
}

TEST_CASE("window spec") {
  CHECK(WindowSpec::from_milliseconds(250.0, 63, 500.0).window_len_samples == 125);
  CHECK_THROWS_AS(WindowSpec({10, 11}).validate(), Error);
  CHECK_THROWS_AS(WindowSpec({0, 1}).validate(), Error);
  CHECK(window_count(124, WindowSpec{}) == 0);
  CHECK(window_count(125, WindowSpec{}) == 1);
  CHECK(window_count(188, WindowSpec{}) == 2);
}
