#include "signstitch/dictionary.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace signstitch {

namespace {

using nlohmann::json;

constexpr int kDictionaryVersion = 1;
constexpr double kLowSimilarity = 0.5;

}  // namespace

Dictionary::Dictionary(double fps, std::string skeleton_id, std::vector<DictEntry> entries, std::size_t angle_width)
    : fps_(fps), skeleton_id_(std::move(skeleton_id)), angle_width_(angle_width), entries_(std::move(entries)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) throw SchemaError("dictionary fps must be positive");
  if (entries_.empty()) throw SchemaError("dictionary has no entries");
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const DictEntry& e = entries_[i];
    if (e.gloss.empty()) throw SchemaError("dictionary entry " + std::to_string(i) + " has an empty gloss");
    if (e.angles.empty()) throw SchemaError("dictionary entry '" + e.gloss + "' has no frames");
    if (e.angles.width() != angle_width_)
      throw SchemaError("dictionary entry '" + e.gloss + "' has width " + std::to_string(e.angles.width()) +
                        ", expected " + std::to_string(angle_width_));
    for (double v : e.angles.values())
      if (!std::isfinite(v)) throw SchemaError("dictionary entry '" + e.gloss + "' contains a non-finite angle");
    if (!index_.emplace(e.gloss, i).second) throw DuplicateGlossError(e.gloss);
  }
}

const DictEntry* Dictionary::lookup(std::string_view gloss) const {
  auto it = index_.find(std::string(gloss));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

Dictionary load_dictionary(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("dictionary is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
    throw FormatError("dictionary must be an object with an 'entries' array");
  if (doc.value("version", 0) != kDictionaryVersion) throw SchemaError("unsupported dictionary version");

  double fps = 0.0;
  std::string skeleton_id;
  try {
    fps = doc.at("fps").get<double>();
    skeleton_id = doc.value("skeleton_id", std::string());
  } catch (const json::exception&) {
    throw SchemaError("dictionary 'fps' must be a number and 'skeleton_id' a string");
  }

  std::vector<DictEntry> entries;
  const json& items = doc["entries"];
  entries.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& item = items[i];
    if (!item.is_object() || !item.contains("gloss") || !item["gloss"].is_string())
      throw SchemaError("dictionary entry " + std::to_string(i) + " has no gloss");
    std::string gloss = item["gloss"].get<std::string>();
    const json& frames = item.value("frames", json::array());
    if (!frames.is_array() || frames.empty())
      throw SchemaError("dictionary entry '" + gloss + "' has no frames");
    std::vector<double> values;
    values.reserve(frames.size() * kAngleCount);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const json& frame = frames[f];
      if (!frame.is_array() || frame.size() != kAngleCount)
        throw SchemaError("dictionary entry '" + gloss + "' frame " + std::to_string(f) + " has width " +
                          std::to_string(frame.is_array() ? frame.size() : 0) + ", expected " +
                          std::to_string(kAngleCount));
      for (const json& v : frame) {
        if (!v.is_number())
          throw SchemaError("dictionary entry '" + gloss + "' frame " + std::to_string(f) + " has a non-numeric angle");
        values.push_back(v.get<double>());
      }
    }
    entries.push_back({std::move(gloss), AngleSequence(kAngleCount, fps, std::move(values))});
  }
  return Dictionary(fps, std::move(skeleton_id), std::move(entries));
}

Dictionary load_dictionary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dictionary file '" + path + "'");
  return load_dictionary(in);
}

void save_dictionary(const Dictionary& dict, std::ostream& out) {
  json entries = json::array();
  for (const DictEntry& e : dict.entries()) {
    json frames = json::array();
    for (std::size_t f = 0; f < e.angles.frames(); ++f) {
      auto fr = e.angles.frame(f);
      frames.push_back(std::vector<double>(fr.begin(), fr.end()));
    }
    entries.push_back({{"gloss", e.gloss}, {"frames", std::move(frames)}});
  }
  json doc = {{"version", kDictionaryVersion},
              {"fps", dict.fps()},
              {"skeleton_id", dict.skeleton_id()},
              {"entries", std::move(entries)}};
  out << doc.dump() << '\n';
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw SchemaError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string token, Eigen::VectorXd vector) {
  if (static_cast<std::size_t>(vector.size()) != dim_)
    throw SchemaError("embedding for '" + token + "' has dimension " + std::to_string(vector.size()) + ", expected " +
                      std::to_string(dim_));
  if (!vector.allFinite()) throw SchemaError("embedding for '" + token + "' is not finite");
  if (!(vector.norm() > 1e-12)) throw SchemaError("embedding for '" + token + "' is a zero vector");
  if (vectors_.contains(token)) throw SchemaError("duplicate embedding token '" + token + "'");
  vectors_.emplace(std::move(token), std::move(vector));
}

const Eigen::VectorXd* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream header(line);
    std::string word;
    if (!(header >> word)) continue;
    if (word != "dim" || !(header >> dim) || dim == 0)
      throw FormatError("embedding file must start with a 'dim N' header");
    break;
  }
  if (dim == 0) throw FormatError("embedding file is empty");

  EmbeddingTable table(dim);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream record(line);
    std::string token;
    if (!(record >> token)) continue;
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d)
      if (!(record >> v[static_cast<Eigen::Index>(d)]))
        throw FormatError("embedding line " + std::to_string(line_no) + " has fewer than " + std::to_string(dim) +
                          " values");
    std::string extra;
    if (record >> extra)
      throw FormatError("embedding line " + std::to_string(line_no) + " has more than " + std::to_string(dim) +
                        " values");
    table.add(std::move(token), std::move(v));
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file '" + path + "'");
  return load_embeddings(in);
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double s = a.dot(b) / (a.norm() * b.norm());
  return std::clamp(s, -1.0, 1.0);
}

Resolution resolve(const Dictionary& dict, std::string_view gloss, const EmbeddingTable* emb) {
  if (const DictEntry* hit = dict.lookup(gloss)) return {hit, std::string(gloss), 1.0, true};

  const std::string query(gloss);
  if (emb == nullptr) throw UnresolvableGlossError(query, "not in dictionary and no embeddings loaded");
  const Eigen::VectorXd* qv = emb->find(gloss);
  if (qv == nullptr) throw UnresolvableGlossError(query, "not in dictionary or embedding table");

  Resolution best;
  for (const DictEntry& e : dict.entries()) {
    const Eigen::VectorXd* ev = emb->find(e.gloss);
    if (ev == nullptr) continue;
    const double s = cosine_similarity(*qv, *ev);
    if (best.entry == nullptr || s > best.similarity || (s == best.similarity && e.gloss < best.matched_gloss)) {
      best.entry = &e;
      best.matched_gloss = e.gloss;
      best.similarity = s;
    }
  }
  if (best.entry == nullptr) throw UnresolvableGlossError(query, "no dictionary gloss has an embedding");
  if (best.similarity < kLowSimilarity)
    spdlog::warn("gloss '{}' substituted by '{}' with low cosine similarity {:.3f}", query, best.matched_gloss,
                 best.similarity);
  return best;
}

CoverageReport coverage(const Dictionary& dict, const std::set<std::string>& vocab) {
  CoverageReport report;
  for (const std::string& g : vocab) {
    if (dict.contains(g))
      ++report.covered_count;
    else
      report.missing.push_back(g);  // std::set iterates in sorted order
  }
  report.ratio = vocab.empty() ? 1.0 : static_cast<double>(report.covered_count) / static_cast<double>(vocab.size());
  return report;
}

std::string normalize_gloss(std::string_view gloss, const GlossNormalization& opts) {
  std::string out(gloss);
  if (opts.strip_variant_suffix) {
    std::size_t end = out.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(out[end - 1]))) --end;
    if (end > 0) out.resize(end);
  }
  if (opts.fold_case)
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

Dictionary normalize_dictionary(const Dictionary& dict, const GlossNormalization& opts) {
  std::map<std::string, const DictEntry*> chosen;
  for (const DictEntry& e : dict.entries()) {
    auto [it, inserted] = chosen.emplace(normalize_gloss(e.gloss, opts), &e);
    if (!inserted && e.gloss < it->second->gloss) it->second = &e;
  }
  std::vector<DictEntry> entries;
  entries.reserve(chosen.size());
  for (const auto& [key, e] : chosen) entries.push_back({key, e->angles});
  return Dictionary(dict.fps(), dict.skeleton_id(), std::move(entries), dict.angle_width());
}

}  // namespace signstitch
