#include <doctest.h>

#include "signstitch/butterworth.hpp"
#include "support.hpp"

using namespace signstitch;
using namespace signstitch::testing;

namespace {

// Single-channel pose-like sequence (one keypoint, signal on x only).
PoseSequence channel_sequence(const std::vector<double>& x, double fps) {
  std::vector<double> v(x.size() * 3, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) v[3 * i] = x[i];
  return PoseSequence(1, fps, std::move(v));
}

std::vector<double> x_channel(const PoseSequence& s) {
  std::vector<double> x(s.frames());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.values()[3 * i];
  return x;
}

std::vector<double> sine(std::size_t n, double freq, double fps) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fps);
  return x;
}

double db(double g) { return 20.0 * std::log10(g); }

// Magnitude of a bilinear Butterworth: 1 / sqrt(1 + (tan(pi f/fs) / tan(pi fc/fs))^(2n)).
double warped_gain(double f, double fc, double fs, int order) {
  const double r = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

}  // namespace

TEST_CASE("design rejects unrealisable settings") {
  CHECK_THROWS_AS(design_butterworth_lowpass(3, 4.0, 25.0), ConfigurationError);
  CHECK_THROWS_AS(design_butterworth_lowpass(0, 4.0, 25.0), ConfigurationError);
  CHECK_THROWS_AS(design_butterworth_lowpass(4, 12.5, 25.0), ConfigurationError);
  CHECK_THROWS_AS(design_butterworth_lowpass(4, 0.0, 25.0), ConfigurationError);
  CHECK(design_butterworth_lowpass(4, 4.0, 25.0).size() == 2);
  CHECK(design_butterworth_lowpass(2, 4.0, 25.0).size() == 1);
}

TEST_CASE("cascade response equals the pre-warped Butterworth magnitude") {
  for (int order : {2, 4, 6}) {
    for (double fs : {25.0, 50.0, 200.0}) {
      const auto sections = design_butterworth_lowpass(order, 4.0, fs);
      CHECK(std::abs(frequency_response(sections, 0.0, fs)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(frequency_response(sections, 4.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
      for (double f = 0.25; f < fs / 2.0; f += 0.25)
        REQUIRE(std::abs(frequency_response(sections, f, fs)) == doctest::Approx(warped_gain(f, 4.0, fs, order)).epsilon(1e-9));
    }
  }
}

TEST_CASE("constant input passes unchanged") {
  const PoseSequence s = channel_sequence(std::vector<double>(120, 3.25), 25.0);
  const PoseSequence out = butterworth_lowpass(s, 4.0, 4);
  for (double v : x_channel(out)) REQUIRE(std::abs(v - 3.25) < 1e-9);
}

TEST_CASE("sinusoid gains after forward-backward filtering") {
  // Zero-phase filtering squares the single-pass magnitude.
  const double fs = 200.0, fc = 2.0;
  const std::size_t n = 4000, lo = 800, hi = 3200;

  SUBCASE("order 2 at the cutoff: about -6 dB") {
    const auto x = sine(n, fc, fs);
    const auto y = x_channel(butterworth_lowpass(channel_sequence(x, fs), fc, 2));
    CHECK(db(sinusoid_amplitude(y, fc, fs, lo, hi)) == doctest::Approx(-6.0206).epsilon(0.01));
  }

  SUBCASE("order 4 at twice the cutoff: about -48 dB") {
    const auto x = sine(n, 2.0 * fc, fs);
    const auto y = x_channel(butterworth_lowpass(channel_sequence(x, fs), fc, 4));
    const double expected = db(warped_gain(2.0 * fc, fc, fs, 4) * warped_gain(2.0 * fc, fc, fs, 4));
    CHECK(std::abs(db(sinusoid_amplitude(y, 2.0 * fc, fs, lo, hi)) - expected) < 0.05);
    CHECK(expected == doctest::Approx(db(1.0 / 257.0)).epsilon(0.01));
  }

  SUBCASE("no phase shift") {
    const auto x = sine(n, 1.0, fs);
    const auto y = x_channel(butterworth_lowpass(channel_sequence(x, fs), fc, 4));
    // Residual against the scaled input is tiny if the output is in phase.
    const double g = sinusoid_amplitude(y, 1.0, fs, lo, hi);
    double worst = 0.0;
    for (std::size_t i = lo; i < hi; ++i) worst = std::max(worst, std::abs(y[i] - g * x[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("zero-phase filtering commutes with time reversal") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(257);
  for (double& v : x) v = noise(rng);
  const auto y = x_channel(butterworth_lowpass(channel_sequence(x, 25.0), 4.0, 4));
  std::vector<double> xr(x.rbegin(), x.rend());
  auto yr = x_channel(butterworth_lowpass(channel_sequence(xr, 25.0), 4.0, 4));
  std::reverse(yr.begin(), yr.end());
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(y[i] - yr[i]) < 1e-6);
}

TEST_CASE("short sequences are returned unchanged") {
  std::mt19937_64 rng(1);
  const PoseSequence s = random_poses(rng, 11);
  CHECK(butterworth_lowpass(s, 4.0, 4).values() == s.values());
  const PoseSequence longer = random_poses(rng, 12);
  CHECK(butterworth_lowpass(longer, 4.0, 4).values() != longer.values());
}

TEST_CASE("filtfilt validates padding") {
  const auto sections = design_butterworth_lowpass(2, 4.0, 25.0);
  std::vector<double> x(5, 1.0);
  CHECK_THROWS_AS(filtfilt(sections, x, 5), InvalidInputError);
  CHECK_NOTHROW(filtfilt(sections, x, 4));
}
