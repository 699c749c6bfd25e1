#include "signstitch/butterworth.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace signstitch {

namespace {

// Runs the cascade along time over a frame-major block of `width` independent
// channels, front to back or back to front. Every section starts in the
// steady state it would reach after an infinitely long input equal to the
// first sample visited. Channels sit in the inner loop so it vectorises.
void run_cascade(std::span<const Biquad> sections, std::span<double> block, std::size_t width, bool backward) {
  const std::size_t frames = block.size() / width;
  if (frames == 0) return;
  std::vector<double> level(block.begin() + static_cast<std::ptrdiff_t>(backward ? (frames - 1) * width : 0),
                            block.begin() + static_cast<std::ptrdiff_t>(backward ? frames * width : width));
  std::vector<double> z1(width), z2(width);
  for (const Biquad& s : sections) {
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    for (std::size_t c = 0; c < width; ++c) {
      const double out = gain * level[c];
      z1[c] = out - s.b0 * level[c];
      z2[c] = s.b2 * level[c] - s.a2 * out;
      level[c] = out;
    }
    for (std::size_t step = 0; step < frames; ++step) {
      double* row = block.data() + (backward ? frames - 1 - step : step) * width;
      for (std::size_t c = 0; c < width; ++c) {
        const double in = row[c];
        const double y = s.b0 * in + z1[c];
        z1[c] = s.b1 * in - s.a1 * y + z2[c];
        z2[c] = s.b2 * in - s.a2 * y;
        row[c] = y;
      }
    }
  }
}

// Zero-phase filtering of a frame-major block in place with odd reflective
// padding. Forward-backward and backward-forward differ only through the edge
// transients; their mean is exactly symmetric under time reversal.
void filtfilt_block(std::span<const Biquad> sections, std::span<double> block, std::size_t width, std::size_t pad) {
  const std::size_t n = block.size() / width;
  if (n == 0) return;
  if (pad >= n) throw InvalidInputError("filter padding must be shorter than the signal");

  std::vector<double> a((n + 2 * pad) * width);
  for (std::size_t i = 0; i < pad; ++i)
    for (std::size_t c = 0; c < width; ++c) {
      a[i * width + c] = 2.0 * block[c] - block[(pad - i) * width + c];
      a[(pad + n + i) * width + c] = 2.0 * block[(n - 1) * width + c] - block[(n - 2 - i) * width + c];
    }
  std::copy(block.begin(), block.end(), a.begin() + static_cast<std::ptrdiff_t>(pad * width));
  std::vector<double> b = a;

  run_cascade(sections, a, width, false);
  run_cascade(sections, a, width, true);
  run_cascade(sections, b, width, true);
  run_cascade(sections, b, width, false);

  for (std::size_t i = 0; i < n * width; ++i) block[i] = 0.5 * (a[pad * width + i] + b[pad * width + i]);
}

}  // namespace

std::vector<Biquad> design_butterworth_lowpass(int order, double cutoff_hz, double fps) {
  if (order < 2 || order % 2 != 0) throw ConfigurationError("Butterworth order must be even and >= 2");
  if (!(fps > 0.0)) throw ConfigurationError("sampling rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fps / 2.0))
    throw ConfigurationError("cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, " +
                             std::to_string(fps / 2.0) + ") for " + std::to_string(fps) + " fps");

  const double k = std::tan(std::numbers::pi * cutoff_hz / fps);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  sections.reserve(order / 2);
  for (int i = 1; i <= order / 2; ++i) {
    // Conjugate analog pole pair at angle theta from the imaginary axis.
    const double theta = std::numbers::pi * (2.0 * i - 1.0) / (2.0 * order);
    const double q = 2.0 * std::sin(theta);
    const double norm = 1.0 / (1.0 + q * k + k2);
    const double b0 = k2 * norm;
    sections.push_back({b0, 2.0 * b0, b0, 2.0 * (k2 - 1.0) * norm, (1.0 - q * k + k2) * norm});
  }
  return sections;
}

std::complex<double> frequency_response(std::span<const Biquad> sections, double freq_hz, double fps) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fps);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const Biquad& s : sections) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

void filtfilt(std::span<const Biquad> sections, std::span<double> channel, std::size_t pad) {
  filtfilt_block(sections, channel, 1, pad);
}

PoseSequence butterworth_lowpass(const PoseSequence& seq, double cutoff_hz, int order) {
  const auto sections = design_butterworth_lowpass(order, cutoff_hz, seq.fps());
  const std::size_t frames = seq.frames();
  const std::size_t min_len = 3 * static_cast<std::size_t>(order);
  if (frames < min_len) {
    spdlog::warn("sequence of {} frames is shorter than {}; skipping motion filter", frames, min_len);
    return seq;
  }
  const std::size_t pad = std::min(min_len, frames - 1);

  PoseSequence out = seq;
  filtfilt_block(sections, out.values(), seq.width(), pad);
  return out;
}

}  // namespace signstitch
