#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "signstitch/skeleton.hpp"

namespace signstitch {

struct DictEntry {
  std::string gloss;
  AngleSequence angles;
};

/// Isolated-sign dictionary: gloss -> joint-angle sequence. Entries keep the
/// order they were added in; lookups are exact and case-sensitive.
class Dictionary {
 public:
  Dictionary(double fps, std::string skeleton_id, std::vector<DictEntry> entries,
             std::size_t angle_width = kAngleCount);

  /// nullptr on a miss.
  const DictEntry* lookup(std::string_view gloss) const;
  bool contains(std::string_view gloss) const { return lookup(gloss) != nullptr; }

  const std::vector<DictEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double fps() const { return fps_; }
  const std::string& skeleton_id() const { return skeleton_id_; }
  std::size_t angle_width() const { return angle_width_; }

 private:
  double fps_;
  std::string skeleton_id_;
  std::size_t angle_width_;
  std::vector<DictEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

Dictionary load_dictionary(std::istream& in);
Dictionary load_dictionary_file(const std::string& path);
void save_dictionary(const Dictionary& dict, std::ostream& out);

/// Token -> dense vector table used to substitute out-of-vocabulary glosses.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  /// Rejects wrong dimensions, non-finite values, (near-)zero vectors and
  /// duplicate tokens.
  void add(std::string token, Eigen::VectorXd vector);
  const Eigen::VectorXd* find(std::string_view token) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

/// Text format: header line "dim N", then one "token v1 ... vN" record per line.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Resolution {
  const DictEntry* entry = nullptr;
  std::string matched_gloss;
  double similarity = 0.0;
  bool exact = false;
};

/// Exact hit, otherwise the dictionary gloss whose embedding has the highest
/// cosine similarity with the query's (ties go to the lexicographically
/// smallest gloss). `emb` may be null, in which case only exact hits resolve.
Resolution resolve(const Dictionary& dict, std::string_view gloss, const EmbeddingTable* emb);

struct CoverageReport {
  std::size_t covered_count = 0;
  std::vector<std::string> missing;  // sorted
  double ratio = 1.0;
};

CoverageReport coverage(const Dictionary& dict, const std::set<std::string>& vocab);

struct GlossNormalization {
  bool fold_case = false;
  bool strip_variant_suffix = false;  // "REGEN2" -> "REGEN"
  bool enabled() const { return fold_case || strip_variant_suffix; }
};

std::string normalize_gloss(std::string_view gloss, const GlossNormalization& opts);

/// Re-keys a dictionary under `opts`. When several glosses collapse onto one
/// key the lexicographically smallest original wins.
Dictionary normalize_dictionary(const Dictionary& dict, const GlossNormalization& opts);

}  // namespace signstitch
