#pragma once

// Shared fixtures and brute-force oracles for the test suites. Oracles here
// are deliberately naive re-derivations and must not call the code they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "signstitch/dictionary.hpp"
#include "signstitch/metrics.hpp"
#include "signstitch/skeleton.hpp"

namespace signstitch::testing {

/// Random angle frame with entries uniform in [-range, range].
inline AngleFrame random_angles(std::mt19937_64& rng, std::size_t count, double range = std::numbers::pi) {
  std::uniform_real_distribution<double> u(-range, range);
  AngleFrame a(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = u(rng);
  return a;
}

/// A smooth isolated "sign": each angle follows a low-frequency sinusoid
/// around a random posture.
inline AngleSequence smooth_sign(std::mt19937_64& rng, std::size_t frames, double fps = 25.0) {
  std::uniform_real_distribution<double> posture(-0.6, 0.6);
  std::uniform_real_distribution<double> amp(0.0, 0.25);
  std::uniform_real_distribution<double> freq(0.3, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> values(frames * kAngleCount);
  for (std::size_t c = 0; c < kAngleCount; ++c) {
    const double p = posture(rng), a = amp(rng), f = freq(rng), ph = phase(rng);
    for (std::size_t t = 0; t < frames; ++t)
      values[t * kAngleCount + c] = p + a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / fps + ph);
  }
  return AngleSequence(kAngleCount, fps, std::move(values));
}

inline std::string toy_gloss(std::size_t i) { return "SIGN" + std::to_string(i); }

/// `count` smooth signs with lengths uniform in [min_frames, max_frames].
inline Dictionary toy_dictionary(std::size_t count, std::uint64_t seed, std::size_t min_frames = 30,
                                 std::size_t max_frames = 50, double fps = 25.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(min_frames, max_frames);
  std::vector<DictEntry> entries;
  for (std::size_t i = 0; i < count; ++i) entries.push_back({toy_gloss(i), smooth_sign(rng, len(rng), fps)});
  return Dictionary(fps, reference_skeleton().id(), std::move(entries));
}

inline PoseSequence random_poses(std::mt19937_64& rng, std::size_t frames, std::size_t keypoints = kKeypointCount,
                                 double fps = 25.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(frames * keypoints * 3);
  for (double& x : v) x = n(rng);
  return PoseSequence(keypoints, fps, std::move(v));
}

// --- oracles ---------------------------------------------------------------

/// Mean keypoint displacement between two frames, written as explicit loops.
inline double displacement_oracle(const PoseSequence& s, std::size_t i) {
  const auto& v = s.values();
  const std::size_t w = s.width();
  double sum = 0.0;
  for (std::size_t k = 0; k < s.keypoints(); ++k) {
    double sq = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = v[(i + 1) * w + 3 * k + c] - v[i * w + 3 * k + c];
      sq += d * d;
    }
    sum += std::sqrt(sq);
  }
  return sum / static_cast<double>(s.keypoints());
}

/// Linear interpolation of channel values at fractional time t.
inline std::vector<double> lerp_oracle(const std::vector<double>& values, std::size_t width, double t) {
  const std::size_t frames = values.size() / width;
  const auto lo = static_cast<std::size_t>(std::floor(t));
  const std::size_t hi = std::min(lo + 1, frames - 1);
  const double w = t - static_cast<double>(lo);
  std::vector<double> out(width);
  for (std::size_t c = 0; c < width; ++c)
    out[c] = (1.0 - w) * values[lo * width + c] + w * values[hi * width + c];
  return out;
}

/// Brute-force argmax of cosine similarity; ties to the smallest gloss.
inline std::string cosine_argmax_oracle(const std::vector<double>& query,
                                        const std::map<std::string, std::vector<double>>& candidates) {
  std::string best;
  double best_s = -2.0;
  for (const auto& [gloss, v] : candidates) {  // std::map: ascending gloss order
    double dot = 0.0, nq = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      dot += query[i] * v[i];
      nq += query[i] * query[i];
      nv += v[i] * v[i];
    }
    const double s = dot / std::sqrt(nq * nv);
    if (s > best_s) {
      best_s = s;
      best = gloss;
    }
  }
  return best;
}

/// n-grams as joined strings, counted in a std::map.
inline std::map<std::string, int> ngram_oracle(const Tokens& t, std::size_t n) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    std::string key;
    for (std::size_t j = i; j < i + n; ++j) key += t[j] + '\x1f';
    ++out[key];
  }
  return out;
}

struct BleuOracle {
  std::vector<double> bleu;
  std::vector<double> precisions;
};

inline BleuOracle bleu_oracle(const Corpus& corpus, std::size_t max_n = 4) {
  std::vector<double> m(max_n, 0.0), t(max_n, 0.0);
  double c = 0, r = 0;
  for (const auto& p : corpus) {
    c += static_cast<double>(p.hypothesis.size());
    r += static_cast<double>(p.reference.size());
    for (std::size_t n = 1; n <= max_n; ++n) {
      auto h = ngram_oracle(p.hypothesis, n);
      auto rf = ngram_oracle(p.reference, n);
      for (auto& [k, cnt] : h) {
        t[n - 1] += cnt;
        m[n - 1] += std::min(cnt, rf.count(k) ? rf[k] : 0);
      }
    }
  }
  BleuOracle o;
  const double bp = c == 0 ? 0.0 : (c >= r ? 1.0 : std::exp(1.0 - r / c));
  for (std::size_t k = 1; k <= max_n; ++k) {
    o.precisions.push_back(t[k - 1] == 0 ? 0.0 : m[k - 1] / t[k - 1]);
    double prod = 1.0;
    bool zero = c == 0;
    for (std::size_t n = 0; n < k; ++n) {
      const double p = t[n] == 0 ? 0.0 : m[n] / t[n];
      if (p == 0.0) zero = true;
      prod *= p;
    }
    o.bleu.push_back(zero ? 0.0 : 100.0 * bp * std::pow(prod, 1.0 / static_cast<double>(k)));
  }
  return o;
}

/// LCS by memoised recursion over suffixes.
inline std::size_t lcs_oracle(const Tokens& a, const Tokens& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    return memo[key] = v;
  };
  return go(0, 0);
}

inline double rouge_oracle(const Corpus& corpus) {
  double sum = 0.0;
  for (const auto& p : corpus) {
    const double l = static_cast<double>(lcs_oracle(p.hypothesis, p.reference));
    if (l > 0) {
      const double pr = l / static_cast<double>(p.hypothesis.size());
      const double rc = l / static_cast<double>(p.reference.size());
      sum += 2 * pr * rc / (pr + rc);
    }
  }
  return sum / static_cast<double>(corpus.size());
}

inline Corpus random_corpus(std::mt19937_64& rng, std::size_t pairs, std::size_t vocab = 6, std::size_t max_len = 12) {
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  auto sentence = [&](std::size_t min_len) {
    Tokens t;
    const std::size_t l = std::max(min_len, len(rng));
    for (std::size_t i = 0; i < l; ++i) t.push_back("w" + std::to_string(word(rng)));
    return t;
  };
  Corpus c;
  for (std::size_t i = 0; i < pairs; ++i) {
    Tokens ref = sentence(1);
    Tokens hyp = sentence(0);
    c.push_back({std::move(hyp), std::move(ref)});
  }
  return c;
}

/// Amplitude of the component at `freq` in samples [from, to) by least-squares
/// projection on sin and cos.
inline double sinusoid_amplitude(const std::vector<double>& x, double freq, double fps, std::size_t from,
                                 std::size_t to) {
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(to - from), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(to - from));
  for (std::size_t i = from; i < to; ++i) {
    const double w = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / fps;
    basis(static_cast<Eigen::Index>(i - from), 0) = std::sin(w);
    basis(static_cast<Eigen::Index>(i - from), 1) = std::cos(w);
    y[static_cast<Eigen::Index>(i - from)] = x[i];
  }
  const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(y);
  return coef.norm();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("signstitch_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace signstitch::testing
