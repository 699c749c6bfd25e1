#include "signstitch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "signstitch/errors.hpp"

namespace signstitch {

namespace {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[std::move(gram)];
  }
  return counts;
}

void check_corpus(const Corpus& corpus) {
  if (corpus.empty()) throw InvalidInputError("cannot score an empty corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus[i].reference.empty()) throw InvalidInputError("pair " + std::to_string(i) + " has an empty reference");
}

}  // namespace

Tokens tokenize(std::string_view sentence) {
  Tokens out;
  std::istringstream in{std::string(sentence)};
  std::string tok;
  while (in >> tok) out.push_back(std::move(tok));
  return out;
}

ScoreReport bleu(const Corpus& corpus, const BleuOptions& opts) {
  check_corpus(corpus);
  if (opts.max_n < 1) throw InvalidInputError("BLEU order must be at least 1");
  const auto max_n = static_cast<std::size_t>(opts.max_n);

  std::vector<std::size_t> matches(max_n, 0);
  std::vector<std::size_t> totals(max_n, 0);
  ScoreReport report;
  for (const SentencePair& pair : corpus) {
    report.hypothesis_length += pair.hypothesis.size();
    report.reference_length += pair.reference.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const NgramCounts hyp = count_ngrams(pair.hypothesis, n);
      const NgramCounts ref = count_ngrams(pair.reference, n);
      for (const auto& [gram, count] : hyp) {
        totals[n - 1] += count;
        if (auto it = ref.find(gram); it != ref.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  const double c = static_cast<double>(report.hypothesis_length);
  const double r = static_cast<double>(report.reference_length);
  report.brevity_penalty = c == 0.0 ? 0.0 : std::min(1.0, std::exp(1.0 - r / c));

  double log_sum = 0.0;
  bool zero = c == 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    const double m = static_cast<double>(matches[n]) + (opts.add_one_smoothing ? 1.0 : 0.0);
    const double t = static_cast<double>(totals[n]) + (opts.add_one_smoothing ? 1.0 : 0.0);
    const double p = t == 0.0 ? 0.0 : m / t;
    report.precisions.push_back(p);
    if (p == 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    report.bleu.push_back(zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / static_cast<double>(n + 1)) * 100.0);
  }
  return report;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Corpus& corpus) {
  check_corpus(corpus);
  double sum = 0.0;
  for (const SentencePair& pair : corpus) {
    const double l = static_cast<double>(lcs_length(pair.hypothesis, pair.reference));
    if (l == 0.0) continue;
    const double p = l / static_cast<double>(pair.hypothesis.size());
    const double r = l / static_cast<double>(pair.reference.size());
    sum += 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(corpus.size());
}

ScoreReport score(const Corpus& corpus, const BleuOptions& opts) {
  ScoreReport report = bleu(corpus, opts);
  report.rouge_l = rouge_l(corpus);
  return report;
}

}  // namespace signstitch
