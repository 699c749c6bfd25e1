#pragma once

// Corpus-level BLEU-1..4 and ROUGE-L over pre-tokenised sentences.

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace signstitch {

using Tokens = std::vector<std::string>;

struct SentencePair {
  Tokens hypothesis;
  Tokens reference;
};

using Corpus = std::vector<SentencePair>;

/// Whitespace split; no case folding.
Tokens tokenize(std::string_view sentence);

struct BleuOptions {
  int max_n = 4;
  /// Add-one smoothing of every n-gram precision; for tiny corpora.
  bool add_one_smoothing = false;
};

struct ScoreReport {
  std::vector<double> bleu;        // BLEU-1..max_n on a 0-100 scale
  std::vector<double> precisions;  // modified n-gram precisions p_1..p_max_n
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double rouge_l = 0.0;            // 0-1
};

/// Corpus BLEU: clipped n-gram matches summed over all pairs, brevity penalty
/// min(1, exp(1 - r/c)); BLEU-k is 0 if any p_n (n <= k) is 0 or c is 0.
/// Throws InvalidInputError on an empty corpus or a pair with an empty reference.
ScoreReport bleu(const Corpus& corpus, const BleuOptions& opts = {});

/// Longest-common-subsequence length of two token lists.
std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// Mean over pairs of the LCS F1 (precision = l/|hyp|, recall = l/|ref|).
double rouge_l(const Corpus& corpus);

/// BLEU plus ROUGE-L in one report.
ScoreReport score(const Corpus& corpus, const BleuOptions& opts = {});

}  // namespace signstitch
