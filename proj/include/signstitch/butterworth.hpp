#pragma once

#include <complex>
#include <span>
#include <vector>

#include "signstitch/skeleton.hpp"

namespace signstitch {

/// Direct-form II transposed biquad, a0 normalised to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Digital Butterworth low-pass of even `order`, designed by bilinear transform
/// with the cutoff pre-warped so |H| = 1/sqrt(2) exactly at `cutoff_hz`.
/// Throws ConfigurationError for odd orders or a cutoff outside (0, fps/2).
std::vector<Biquad> design_butterworth_lowpass(int order, double cutoff_hz, double fps);

/// Complex response of the cascade at `freq_hz`.
std::complex<double> frequency_response(std::span<const Biquad> sections, double freq_hz, double fps);

/// Forward-backward (zero-phase) filtering of one channel in place, with odd
/// reflective padding of `pad` samples at each end and steady-state initial
/// conditions. The forward-backward and backward-forward results are averaged
/// so the output commutes with time reversal. Requires pad < channel.size().
void filtfilt(std::span<const Biquad> sections, std::span<double> channel, std::size_t pad);

/// Zero-phase Butterworth smoothing of every coordinate channel. Sequences
/// shorter than 3*order frames are returned unchanged (with a warning).
PoseSequence butterworth_lowpass(const PoseSequence& seq, double cutoff_hz, int order = 4);

}  // namespace signstitch
