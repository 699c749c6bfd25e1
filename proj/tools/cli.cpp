#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "signstitch/augment.hpp"
#include "signstitch/dictionary.hpp"
#include "signstitch/metrics.hpp"
#include "signstitch/pose_io.hpp"
#include "signstitch/skeleton.hpp"
#include "signstitch/stitcher.hpp"

namespace signstitch::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ManifestRecord {
  std::string id;
  std::vector<std::string> glosses;
  std::optional<std::vector<std::size_t>> durations;
  std::optional<double> cutoff_hz;
  std::optional<std::string> text;
};

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest '" + path + "'");
  std::vector<ManifestRecord> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error&) {
      throw FormatError(where + " is not valid JSON");
    }
    ManifestRecord rec;
    try {
      rec.id = doc.at("id").get<std::string>();
      rec.glosses = doc.at("glosses").get<std::vector<std::string>>();
      if (doc.contains("durations_frames") && !doc["durations_frames"].is_null())
        rec.durations = doc["durations_frames"].get<std::vector<std::size_t>>();
      if (doc.contains("cutoff_hz") && !doc["cutoff_hz"].is_null()) rec.cutoff_hz = doc["cutoff_hz"].get<double>();
      if (doc.contains("text") && !doc["text"].is_null()) rec.text = doc["text"].get<std::string>();
    } catch (const json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (rec.id.empty()) throw SchemaError(where + ": empty id");
    if (!ids.insert(rec.id).second) throw SchemaError(where + ": duplicate id '" + rec.id + "'");
    if (rec.durations && rec.durations->size() != rec.glosses.size())
      throw SchemaError(where + ": durations_frames length does not match glosses");
    records.push_back(std::move(rec));
  }
  return records;
}

/// Options shared by the commands that synthesise pose files.
struct SynthesisOptions {
  std::string manifest;
  std::string dict;
  std::string embeddings;
  std::string skeleton;
  std::string out_dir = ".";
  std::string format = "sspk";
  double fps = kDefaultFps;
  double cutoff = kDefaultCutoffHz;
  double subsample_fps = 0.0;
  bool normalize = false;
  bool strict = false;
  bool fold_glosses = false;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_synthesis_options(CLI::App* cmd, SynthesisOptions& o) {
  cmd->add_option("--manifest", o.manifest, "JSON-lines manifest of gloss sequences")->required();
  cmd->add_option("--dict", o.dict, "dictionary file")->required();
  cmd->add_option("--embeddings", o.embeddings, "embedding table for out-of-vocabulary glosses");
  cmd->add_option("--skeleton", o.skeleton, "canonical skeleton file (default: built-in reference skeleton)");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "pose file format")->check(CLI::IsMember({"sspk", "json"}));
  cmd->add_option("--fps", o.fps, "output frame rate")->check(CLI::PositiveNumber);
  cmd->add_option("--cutoff", o.cutoff, "low-pass cutoff in Hz (records may override)")->check(CLI::PositiveNumber);
  cmd->add_option("--subsample-fps", o.subsample_fps, "resample the output to this frame rate")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--normalize", o.normalize, "neck at origin, shoulders on +x, body in the xy-plane");
  cmd->add_flag("--strict", o.strict, "abort on the first failing record");
  cmd->add_flag("--fold-glosses", o.fold_glosses, "match glosses case-insensitively, ignoring numbered variants");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--seed", o.seed, "base seed");
}

struct Resources {
  CanonicalSkeleton skeleton;
  Dictionary dict;
  std::optional<EmbeddingTable> embeddings;
  GlossNormalization normalization;

  const EmbeddingTable* emb() const { return embeddings ? &*embeddings : nullptr; }
};

Resources load_resources(const SynthesisOptions& o) {
  CanonicalSkeleton skel = o.skeleton.empty() ? reference_skeleton() : load_skeleton_file(o.skeleton);
  Dictionary dict = load_dictionary_file(o.dict);
  if (!dict.skeleton_id().empty() && dict.skeleton_id() != skel.id())
    spdlog::warn("dictionary was built for skeleton '{}' but '{}' is loaded", dict.skeleton_id(), skel.id());
  GlossNormalization norm;
  norm.fold_case = norm.strip_variant_suffix = o.fold_glosses;
  if (norm.enabled()) dict = normalize_dictionary(dict, norm);
  std::optional<EmbeddingTable> emb;
  if (!o.embeddings.empty()) emb = load_embeddings_file(o.embeddings);
  return {std::move(skel), std::move(dict), std::move(emb), norm};
}

StitchRequest to_request(const ManifestRecord& rec, const SynthesisOptions& o, const GlossNormalization& norm) {
  StitchRequest req;
  req.glosses = rec.glosses;
  if (norm.enabled())
    for (auto& g : req.glosses) g = normalize_gloss(g, norm);
  req.durations = rec.durations;
  req.cutoff_hz = rec.cutoff_hz.value_or(o.cutoff);
  req.fps = o.fps;
  req.seed = o.seed.value_or(0);
  return req;
}

/// Normalisation and frame-rate conversion applied to every produced sequence.
void post_process(StitchResult& result, const SynthesisOptions& o, const CanonicalSkeleton& skel) {
  if (o.normalize) result.poses = normalize_pose(result.poses, skel.layout());
  if (o.subsample_fps > 0.0 && o.subsample_fps != result.poses.fps()) {
    const std::size_t before = result.poses.frames();
    const auto target = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(before) * o.subsample_fps / result.poses.fps())));
    result.poses = resample(result.poses, target);
    result.poses.set_fps(o.subsample_fps);
    result.gloss_spans = rescale_spans(result.gloss_spans, before, target);
    result.transition_spans = rescale_spans(result.transition_spans, before, target);
  }
}

void write_outputs(const StitchResult& result, const fs::path& stem, PoseFormat format) {
  fs::path pose_path = stem;
  pose_path += format == PoseFormat::kSspk ? ".sspk" : ".json";
  write_pose_file(result.poses, pose_path.string(), format);
  fs::path sidecar = stem;
  sidecar += ".spans.json";
  std::ofstream out(sidecar);
  if (!out) throw FormatError("cannot write '" + sidecar.string() + "'");
  write_sidecar(result, out);
}

struct Outcome {
  bool ok = false;
  std::size_t frames = 0;
  std::string error;
};

/// Runs `task(i)` for i in [0, count) on `jobs` threads. Each index is handled
/// by exactly one worker; outcomes land in their own slot.
template <class Task>
std::vector<Outcome> run_pool(std::size_t count, unsigned jobs, bool strict, Task task) {
  std::vector<Outcome> outcomes(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < count && !abort; i = next++) {
      try {
        outcomes[i].frames = task(i);
        outcomes[i].ok = true;
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
        if (strict) abort = true;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return outcomes;
}

/// Logs failures in index order and returns the exit code.
template <class NameOf>
int report(const std::vector<Outcome>& outcomes, bool strict, NameOf name_of, std::ostream& out, const char* noun) {
  std::size_t done = 0, frames = 0, failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].ok) {
      ++done;
      frames += outcomes[i].frames;
    } else if (!outcomes[i].error.empty()) {
      ++failed;
      spdlog::warn("{} '{}' failed: {}", noun, name_of(i), outcomes[i].error);
    }
  }
  out << noun << "s: " << done << ", total frames: " << frames;
  if (failed > 0) out << ", failed: " << failed;
  out << '\n';
  return strict && failed > 0 ? kDataError : kOk;
}

// ---------------------------------------------------------------------------

int cmd_stitch(const SynthesisOptions& o, std::ostream& out) {
  const Resources res = load_resources(o);
  const auto records = load_manifest(o.manifest);
  fs::create_directories(o.out_dir);
  const PoseFormat format = o.format == "json" ? PoseFormat::kJson : PoseFormat::kSspk;

  auto outcomes = run_pool(records.size(), o.jobs, o.strict, [&](std::size_t i) {
    StitchResult result = stitch(to_request(records[i], o, res.normalization), res.dict, res.emb(), res.skeleton);
    post_process(result, o, res.skeleton);
    write_outputs(result, fs::path(o.out_dir) / records[i].id, format);
    return result.poses.frames();
  });
  return report(outcomes, o.strict, [&](std::size_t i) { return records[i].id; }, out, "sequence");
}

int cmd_augment(const SynthesisOptions& o, const std::string& schedule_path, std::ostream& out) {
  const Resources res = load_resources(o);
  const auto records = load_manifest(o.manifest);
  AugmentSchedule schedule = load_schedule_file(schedule_path);
  if (o.seed) schedule.seed = *o.seed;
  fs::create_directories(o.out_dir);
  const PoseFormat format = o.format == "json" ? PoseFormat::kJson : PoseFormat::kSspk;

  std::vector<NamedRequest> requests;
  requests.reserve(records.size());
  for (const auto& rec : records) requests.push_back({rec.id, to_request(rec, o, res.normalization)});
  const auto variants = expand_schedule(requests, schedule);

  auto outcomes = run_pool(variants.size(), o.jobs, o.strict, [&](std::size_t i) {
    StitchResult result = realize_variant(variants[i], res.dict, res.emb(), res.skeleton);
    post_process(result, o, res.skeleton);
    write_outputs(result, fs::path(o.out_dir) / variants[i].name(), format);
    return result.poses.frames();
  });

  std::ofstream manifest(fs::path(o.out_dir) / "augmented_manifest.jsonl");
  if (!manifest) throw FormatError("cannot write augmented manifest");
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (!outcomes[i].ok) continue;
    const AugmentVariant& v = variants[i];
    json line = {{"id", v.name()},
                 {"source_id", v.request_id},
                 {"glosses", v.request.glosses},
                 {"cutoff_hz", v.request.cutoff_hz},
                 {"permutation_n", v.permutation_n},
                 {"speed_scale", v.speed_scale},
                 {"copy", v.copy},
                 {"seed", v.seed},
                 {"permute_mode", to_string(v.permute_mode)},
                 {"speed_mode", to_string(v.speed_mode)},
                 {"frames", outcomes[i].frames}};
    if (v.request.durations) line["durations_frames"] = *v.request.durations;
    if (const auto& text = records[v.request_index].text) line["text"] = *text;
    manifest << line.dump() << '\n';
  }
  return report(outcomes, o.strict, [&](std::size_t i) { return variants[i].name(); }, out, "variant");
}

/// Reads one raw sign: a JSON object {gloss, frames} or a text file with one
/// whitespace/comma separated frame per line (gloss = file stem).
std::vector<DictEntry> read_raw_angles(const fs::path& path, double fps) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  std::vector<DictEntry> entries;
  if (in.peek() == '{') {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error&) {
      throw FormatError(where + ": not valid JSON");
    }
    if (doc.contains("entries")) {
      std::istringstream again(doc.dump());
      try {
        const Dictionary dict = load_dictionary(again);
        for (const auto& e : dict.entries()) entries.push_back({e.gloss, AngleSequence(e.angles.width(), fps, e.angles.values())});
      } catch (const Error& e) {
        throw SchemaError(where + ": " + e.what());
      }
      return entries;
    }
    const std::string gloss = doc.value("gloss", path.stem().string());
    std::vector<double> values;
    const json& frames = doc.value("frames", json::array());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (!frames[f].is_array() || frames[f].size() != kAngleCount)
        throw SchemaError(where + ": entry '" + gloss + "' frame " + std::to_string(f) + " has width " +
                          std::to_string(frames[f].is_array() ? frames[f].size() : 0) + ", expected " +
                          std::to_string(kAngleCount));
      for (const auto& v : frames[f]) {
        if (!v.is_number()) throw SchemaError(where + ": entry '" + gloss + "' has a non-numeric angle");
        values.push_back(v.get<double>());
      }
    }
    if (values.empty()) throw SchemaError(where + ": entry '" + gloss + "' has no frames");
    entries.push_back({gloss, AngleSequence(kAngleCount, fps, std::move(values))});
    return entries;
  }

  const std::string gloss = path.stem().string();
  std::vector<double> values;
  std::string line;
  std::size_t frame = 0;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream row(line);
    std::vector<double> vals;
    std::string tok;
    while (row >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw FormatError(where + ": entry '" + gloss + "' frame " + std::to_string(frame) + " has a non-numeric value");
      }
    }
    if (vals.empty()) continue;
    if (vals.size() != kAngleCount)
      throw SchemaError(where + ": entry '" + gloss + "' frame " + std::to_string(frame) + " has width " +
                        std::to_string(vals.size()) + ", expected " + std::to_string(kAngleCount));
    values.insert(values.end(), vals.begin(), vals.end());
    ++frame;
  }
  if (values.empty()) throw SchemaError(where + ": entry '" + gloss + "' has no frames");
  entries.push_back({gloss, AngleSequence(kAngleCount, fps, std::move(values))});
  return entries;
}

int cmd_build_dict(const std::vector<std::string>& inputs, const std::string& skeleton_path, double fps,
                   const std::string& output, std::ostream& out) {
  const CanonicalSkeleton skel = skeleton_path.empty() ? reference_skeleton() : load_skeleton_file(skeleton_path);
  std::vector<DictEntry> entries;
  for (const auto& input : inputs)
    for (auto& e : read_raw_angles(input, fps)) entries.push_back(std::move(e));
  Dictionary dict(fps, skel.id(), std::move(entries), skel.angle_count());

  std::ostringstream buf;
  save_dictionary(dict, buf);
  std::ofstream file(output, std::ios::binary);
  if (!file) throw FormatError("cannot write '" + output + "'");
  file << buf.str();
  out << "entries: " << dict.size() << ", fps: " << dict.fps() << '\n';
  return kOk;
}

std::set<std::string> read_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary '" + path + "'");
  std::set<std::string> vocab;
  std::string tok;
  while (in >> tok) vocab.insert(tok);
  return vocab;
}

int cmd_coverage(const std::string& dict_path, const std::string& manifest, const std::string& vocab_path,
                 bool fold, std::ostream& out) {
  Dictionary dict = load_dictionary_file(dict_path);
  GlossNormalization norm;
  norm.fold_case = norm.strip_variant_suffix = fold;
  if (norm.enabled()) dict = normalize_dictionary(dict, norm);
  std::set<std::string> vocab;
  if (!manifest.empty())
    for (const auto& rec : load_manifest(manifest))
      for (const auto& g : rec.glosses) vocab.insert(normalize_gloss(g, norm));
  if (!vocab_path.empty())
    for (const auto& g : read_vocab(vocab_path)) vocab.insert(normalize_gloss(g, norm));
  const CoverageReport r = coverage(dict, vocab);
  out << json{{"covered_count", r.covered_count},
              {"vocab_size", vocab.size()},
              {"ratio", r.ratio},
              {"missing", r.missing}}
             .dump(2)
      << '\n';
  return kOk;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

int cmd_score(const std::string& hyp_path, const std::string& ref_path, bool smooth, std::ostream& out,
              std::ostream& err) {
  const auto hyps = read_lines(hyp_path);
  const auto refs = read_lines(ref_path);
  if (hyps.size() != refs.size()) {
    err << "error: line counts differ: hypotheses " << hyps.size() << ", references " << refs.size() << '\n';
    return kDataError;
  }
  Corpus corpus;
  for (std::size_t i = 0; i < hyps.size(); ++i) corpus.push_back({tokenize(hyps[i]), tokenize(refs[i])});
  BleuOptions opts;
  opts.add_one_smoothing = smooth;
  const ScoreReport r = score(corpus, opts);
  json doc = {{"bleu_1", r.bleu[0]},
              {"bleu_2", r.bleu[1]},
              {"bleu_3", r.bleu[2]},
              {"bleu_4", r.bleu[3]},
              {"rouge_l", r.rouge_l},
              {"brevity_penalty", r.brevity_penalty},
              {"precisions", r.precisions},
              {"hypothesis_length", r.hypothesis_length},
              {"reference_length", r.reference_length},
              {"sentences", corpus.size()}};
  out << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto previous = spdlog::default_logger();
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("signstitch", sink);
  logger->set_pattern("%l: %v");
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  CLI::App app{"Synthesise continuous signing skeleton sequences from an isolated-sign dictionary"};
  app.name(args.empty() ? "signstitch" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  std::vector<std::string> raw_inputs;
  std::string skeleton_path, dict_out;
  double dict_fps = kDefaultFps;
  auto* build = app.add_subcommand("build-dict", "assemble a dictionary file from raw angle files");
  build->add_option("inputs", raw_inputs, "raw angle files (JSON or text) or dictionary files")->required();
  build->add_option("--skeleton", skeleton_path, "canonical skeleton file (default: built-in)");
  build->add_option("--fps", dict_fps, "capture rate of the raw files")->check(CLI::PositiveNumber);
  build->add_option("--out,-o", dict_out, "dictionary file to write")->required();

  SynthesisOptions stitch_opts;
  auto* stitch_cmd = app.add_subcommand("stitch", "stitch manifest records into pose files");
  add_synthesis_options(stitch_cmd, stitch_opts);

  SynthesisOptions aug_opts;
  std::string schedule_path;
  auto* aug = app.add_subcommand("augment", "expand an augmentation schedule and stitch every variant");
  add_synthesis_options(aug, aug_opts);
  aug->add_option("--schedule", schedule_path, "augmentation schedule file")->required();

  std::string cov_dict, cov_manifest, cov_vocab;
  bool cov_fold = false;
  auto* cov = app.add_subcommand("coverage", "report dictionary coverage of a vocabulary");
  cov->add_option("--dict", cov_dict, "dictionary file")->required();
  cov->add_option("--manifest", cov_manifest, "manifest whose glosses form the vocabulary");
  cov->add_option("--vocab", cov_vocab, "whitespace-separated gloss vocabulary file");
  cov->add_flag("--fold-glosses", cov_fold, "match glosses case-insensitively, ignoring numbered variants");

  std::string hyp_path, ref_path;
  bool smooth = false;
  auto* score_cmd = app.add_subcommand("score", "BLEU-1..4 and ROUGE-L of hypotheses against references");
  score_cmd->add_option("--hyp", hyp_path, "hypothesis file, one sentence per line")->required();
  score_cmd->add_option("--ref", ref_path, "reference file, one sentence per line")->required();
  score_cmd->add_flag("--smooth", smooth, "add-one smoothing of n-gram precisions");

  std::string skel_out;
  auto* skel_cmd = app.add_subcommand("skeleton", "write the built-in reference skeleton as JSON");
  skel_cmd->add_option("--out,-o", skel_out, "output file (default: stdout)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "validate a pose file and print its header");
  inspect->add_option("file", inspect_path, "SSPK or JSON pose file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("signstitch");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*build) return cmd_build_dict(raw_inputs, skeleton_path, dict_fps, dict_out, out);
    if (*stitch_cmd) return cmd_stitch(stitch_opts, out);
    if (*aug) return cmd_augment(aug_opts, schedule_path, out);
    if (*cov) {
      if (cov_manifest.empty() && cov_vocab.empty()) {
        err << "error: coverage needs --manifest or --vocab\n";
        return kUsageError;
      }
      return cmd_coverage(cov_dict, cov_manifest, cov_vocab, cov_fold, out);
    }
    if (*score_cmd) return cmd_score(hyp_path, ref_path, smooth, out, err);
    if (*inspect) {
      const PoseSequence p = read_pose_file(inspect_path);
      out << json{{"keypoints", p.keypoints()}, {"frames", p.frames()}, {"fps", p.fps()}}.dump() << '\n';
      return kOk;
    }
    if (*skel_cmd) {
      if (skel_out.empty()) {
        save_skeleton(reference_skeleton(), out);
      } else {
        std::ofstream file(skel_out);
        if (!file) throw FormatError("cannot write '" + skel_out + "'");
        save_skeleton(reference_skeleton(), file);
      }
      return kOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace signstitch::cli
