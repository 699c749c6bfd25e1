#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sstream>

#include "signstitch/dictionary.hpp"
#include "support.hpp"

using namespace signstitch;
using namespace signstitch::testing;
using nlohmann::json;

namespace {

json frame_of(double v, std::size_t width = kAngleCount) { return json(std::vector<double>(width, v)); }

json two_entry_doc() {
  return {{"version", 1},
          {"fps", 25.0},
          {"skeleton_id", "reference-61"},
          {"entries",
           {{{"gloss", "REGEN"}, {"frames", {frame_of(0.1), frame_of(0.2), frame_of(0.3)}}},
            {{"gloss", "SONNE"}, {"frames", {frame_of(-0.4), frame_of(0.0)}}}}}};
}

Dictionary parse(const json& doc) {
  std::istringstream in(doc.dump());
  return load_dictionary(in);
}

EmbeddingTable table_from(const std::map<std::string, std::vector<double>>& vecs) {
  EmbeddingTable t(vecs.begin()->second.size());
  for (const auto& [g, v] : vecs) t.add(g, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  return t;
}

}  // namespace

TEST_CASE("dictionary loads entries in file order") {
  const Dictionary d = parse(two_entry_doc());
  REQUIRE(d.size() == 2);
  CHECK(d.fps() == 25.0);
  CHECK(d.skeleton_id() == "reference-61");
  CHECK(d.entries()[0].gloss == "REGEN");
  CHECK(d.entries()[1].gloss == "SONNE");
  const DictEntry* regen = d.lookup("REGEN");
  REQUIRE(regen != nullptr);
  CHECK(regen->angles.frames() == 3);
  CHECK(regen->angles.width() == 104);
  CHECK(regen->angles.frame(2)[57] == 0.3);
  CHECK(d.lookup("SONNE")->angles.frames() == 2);
}

TEST_CASE("lookup is exact and case-sensitive") {
  const Dictionary d = parse(two_entry_doc());
  CHECK(d.lookup("regen") == nullptr);
  CHECK(d.lookup("REGEN ") == nullptr);
  CHECK(d.lookup("MOND") == nullptr);
  CHECK(d.contains("SONNE"));
}

TEST_CASE("schema violations are reported with context") {
  SUBCASE("narrow frame names the entry and frame") {
    json doc = two_entry_doc();
    doc["entries"][1]["frames"][1] = frame_of(0.0, 103);
    try {
      parse(doc);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("SONNE") != std::string::npos);
      CHECK(msg.find("frame 1") != std::string::npos);
      CHECK(msg.find("103") != std::string::npos);
    }
  }
  SUBCASE("duplicate gloss") {
    json doc = two_entry_doc();
    doc["entries"][1]["gloss"] = "REGEN";
    try {
      parse(doc);
      FAIL("expected DuplicateGlossError");
    } catch (const DuplicateGlossError& e) {
      CHECK(e.gloss() == "REGEN");
    }
  }
  SUBCASE("non-numeric angle") {
    json doc = two_entry_doc();
    doc["entries"][0]["frames"][0][5] = "x";
    CHECK_THROWS_AS(parse(doc), SchemaError);
  }
  SUBCASE("entry without frames") {
    json doc = two_entry_doc();
    doc["entries"][0]["frames"] = json::array();
    CHECK_THROWS_AS(parse(doc), SchemaError);
  }
  SUBCASE("garbled bytes") {
    std::istringstream in("{\"entries\": [1, 2");
    CHECK_THROWS_AS(load_dictionary(in), FormatError);
  }
  SUBCASE("non-finite angles are rejected in memory") {
    std::vector<double> v(kAngleCount, 0.0);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Dictionary(25.0, "x", {{"A", AngleSequence(kAngleCount, 25.0, v)}}), SchemaError);
  }
}

TEST_CASE("save then load is byte-identical") {
  const Dictionary d = toy_dictionary(6, 99);
  std::ostringstream first;
  save_dictionary(d, first);
  std::istringstream in(first.str());
  const Dictionary back = load_dictionary(in);
  std::ostringstream second;
  save_dictionary(back, second);
  CHECK(second.str() == first.str());
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.entries()[i].gloss == d.entries()[i].gloss);
    CHECK(back.entries()[i].angles.values() == d.entries()[i].angles.values());
  }
}

TEST_CASE("resolve") {
  const Dictionary d = toy_dictionary(4, 1);  // SIGN0..SIGN3

  SUBCASE("exact hit needs no embeddings") {
    const Resolution r = resolve(d, "SIGN2", nullptr);
    CHECK(r.exact);
    CHECK(r.similarity == 1.0);
    CHECK(r.entry == d.lookup("SIGN2"));
  }

  SUBCASE("query with the same vector as a dictionary gloss resolves to it") {
    const EmbeddingTable t = table_from({{"SIGN0", {1, 0, 0}},
                                         {"SIGN1", {0, 1, 0}},
                                         {"SIGN2", {0, 0, 1}},
                                         {"SIGN3", {1, 1, 0}},
                                         {"HAUS", {0, 0, 1}}});
    const Resolution r = resolve(d, "HAUS", &t);
    CHECK_FALSE(r.exact);
    CHECK(r.matched_gloss == "SIGN2");
    CHECK(r.similarity == doctest::Approx(1.0));
  }

  SUBCASE("ties go to the smallest gloss") {
    const EmbeddingTable t = table_from({{"SIGN0", {0, 1}}, {"SIGN1", {1, 0}}, {"SIGN3", {1, 0}}, {"Q", {1, 0}}});
    CHECK(resolve(d, "Q", &t).matched_gloss == "SIGN1");
  }

  SUBCASE("low similarity still substitutes") {
    const EmbeddingTable t = table_from({{"SIGN0", {1, 0}}, {"Q", {-1, 0.1}}});
    const Resolution r = resolve(d, "Q", &t);
    CHECK(r.matched_gloss == "SIGN0");
    CHECK(r.similarity < 0.0);
  }

  SUBCASE("unresolvable") {
    const EmbeddingTable t = table_from({{"SIGN0", {1, 0}}});
    CHECK_THROWS_AS(resolve(d, "MOND", nullptr), UnresolvableGlossError);
    CHECK_THROWS_AS(resolve(d, "MOND", &t), UnresolvableGlossError);
    const EmbeddingTable only_query = table_from({{"MOND", {1, 0}}});
    CHECK_THROWS_AS(resolve(d, "MOND", &only_query), UnresolvableGlossError);
  }

  SUBCASE("agrees with brute force over random tables") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n(0.0, 1.0);
    const Dictionary big = toy_dictionary(30, 5, 2, 3);
    for (int trial = 0; trial < 100; ++trial) {
      std::map<std::string, std::vector<double>> cand;
      for (std::size_t i = 0; i < 30; ++i) {
        std::vector<double> v(8);
        for (double& x : v) x = n(rng);
        cand[toy_gloss(i)] = v;
      }
      std::vector<double> q(8);
      for (double& x : q) x = n(rng);
      auto all = cand;
      all["QUERY"] = q;
      const EmbeddingTable t = table_from(all);
      REQUIRE(resolve(big, "QUERY", &t).matched_gloss == cosine_argmax_oracle(q, cand));
    }
  }
}

TEST_CASE("coverage") {
  const Dictionary d = parse(two_entry_doc());
  const CoverageReport r = coverage(d, {"SONNE", "MOND", "REGEN", "HAUS"});
  CHECK(r.covered_count == 2);
  CHECK(r.missing == std::vector<std::string>{"HAUS", "MOND"});
  CHECK(r.ratio == 0.5);
  CHECK(coverage(d, {}).ratio == 1.0);
}

TEST_CASE("embedding file parsing") {
  SUBCASE("valid") {
    std::istringstream in("dim 3\nREGEN 1 0 0\n\nSONNE 0.5 0.5 0\n");
    const EmbeddingTable t = load_embeddings(in);
    CHECK(t.dim() == 3);
    CHECK(t.size() == 2);
    REQUIRE(t.find("SONNE") != nullptr);
    CHECK((*t.find("SONNE"))[1] == 0.5);
    CHECK(t.find("sonne") == nullptr);
  }
  SUBCASE("missing header") {
    std::istringstream in("REGEN 1 0 0\n");
    CHECK_THROWS_AS(load_embeddings(in), FormatError);
  }
  SUBCASE("short and long rows") {
    std::istringstream a("dim 3\nREGEN 1 0\n");
    CHECK_THROWS_AS(load_embeddings(a), FormatError);
    std::istringstream b("dim 3\nREGEN 1 0 0 0\n");
    CHECK_THROWS_AS(load_embeddings(b), FormatError);
  }
  SUBCASE("zero vector and duplicates") {
    std::istringstream a("dim 2\nREGEN 0 0\n");
    CHECK_THROWS(load_embeddings(a));
    std::istringstream b("dim 2\nREGEN 1 0\nREGEN 0 1\n");
    CHECK_THROWS(load_embeddings(b));
  }
}

TEST_CASE("gloss normalisation") {
  const GlossNormalization fold{true, true};
  CHECK(normalize_gloss("regen2", fold) == "REGEN");
  CHECK(normalize_gloss("Sonne", {true, false}) == "SONNE");
  CHECK(normalize_gloss("REGEN2", {false, true}) == "REGEN");
  CHECK(normalize_gloss("42", fold) == "42");

  std::vector<double> a(kAngleCount, 0.1), b(kAngleCount, 0.2);
  const Dictionary d(25.0, "x", {{"regen", AngleSequence(kAngleCount, 25.0, b)}, {"REGEN1", AngleSequence(kAngleCount, 25.0, a)}});
  const Dictionary n = normalize_dictionary(d, fold);
  REQUIRE(n.size() == 1);
  // "REGEN1" < "regen": the upper-case original wins.
  CHECK(n.lookup("REGEN")->angles.values() == a);
}
