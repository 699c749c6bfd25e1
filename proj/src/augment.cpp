#include "signstitch/augment.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace signstitch {

namespace {

std::string format_scale(double scale) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, scale);
  return std::string(buf, end);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

const char* to_string(PermuteMode mode) { return mode == PermuteMode::kWindow ? "window" : "swaps"; }
const char* to_string(SpeedMode mode) { return mode == SpeedMode::kSequence ? "sequence" : "durations"; }

std::uint64_t uniform_below(Generator& gen, std::uint64_t bound) {
  if (bound == 0) throw InvalidInputError("uniform_below bound must be positive");
  // 2^64 mod bound; draws below it would bias the modulo.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t x = gen();
  while (x < threshold) x = gen();
  return x % bound;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::size_t> permutation_indices(std::size_t count, std::size_t n, std::uint64_t seed, PermuteMode mode) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  if (n == 0 || count < 2) return idx;

  Generator gen(seed);
  if (mode == PermuteMode::kWindow) {
    const std::size_t w = std::min(n, count);
    const std::size_t start = uniform_below(gen, count - w + 1);
    for (std::size_t i = w - 1; i > 0; --i) {
      const std::size_t j = uniform_below(gen, i + 1);
      std::swap(idx[start + i], idx[start + j]);
    }
  } else {
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t j = uniform_below(gen, count - 1);
      std::swap(idx[j], idx[j + 1]);
    }
  }
  return idx;
}

std::vector<std::string> permute_glosses(const std::vector<std::string>& glosses, std::size_t n, std::uint64_t seed,
                                         PermuteMode mode) {
  std::vector<std::string> out;
  out.reserve(glosses.size());
  for (std::size_t i : permutation_indices(glosses.size(), n, seed, mode)) out.push_back(glosses[i]);
  return out;
}

std::size_t scaled_length(std::size_t frames, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidInputError("speed scale must be positive");
  const double len = std::round(static_cast<double>(frames) * scale);
  if (len < 1.0)
    throw InvalidInputError("speed scale " + format_scale(scale) + " leaves no frames of " + std::to_string(frames));
  return static_cast<std::size_t>(len);
}

PoseSequence scale_speed(const PoseSequence& poses, double scale) {
  return resample(poses, scaled_length(poses.frames(), scale));
}

void AugmentSchedule::validate() const {
  for (double s : speed_scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw SchemaError("speed scales must be positive");
  if (copies < 1) throw SchemaError("schedule copies must be at least 1");
}

AugmentSchedule load_schedule(std::istream& in) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("schedule must be a JSON object");
  AugmentSchedule s;
  try {
    if (doc.contains("permutation_ns")) {
      s.permutation_ns.clear();
      for (const json& v : doc.at("permutation_ns")) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
          throw SchemaError("permutation_ns must be non-negative integers");
        s.permutation_ns.push_back(v.get<std::size_t>());
      }
    }
    if (doc.contains("speed_scales")) s.speed_scales = doc["speed_scales"].get<std::vector<double>>();
    s.copies = doc.value("copies", std::size_t{1});
    s.seed = doc.value("seed", std::uint64_t{0});
    const std::string pm = doc.value("permute_mode", std::string("window"));
    const std::string sm = doc.value("speed_mode", std::string("sequence"));
    if (pm != "window" && pm != "swaps") throw SchemaError("permute_mode must be 'window' or 'swaps'");
    if (sm != "sequence" && sm != "durations") throw SchemaError("speed_mode must be 'sequence' or 'durations'");
    s.permute_mode = pm == "window" ? PermuteMode::kWindow : PermuteMode::kSwaps;
    s.speed_mode = sm == "sequence" ? SpeedMode::kSequence : SpeedMode::kDurations;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schedule field has the wrong type: ") + e.what());
  }
  s.validate();
  return s;
}

AugmentSchedule load_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open schedule file '" + path + "'");
  return load_schedule(in);
}

std::string AugmentVariant::name() const {
  return request_id + ".N" + std::to_string(permutation_n) + ".s" + format_scale(speed_scale) + ".c" +
         std::to_string(copy);
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& request_id, std::size_t n, double scale,
                          std::size_t copy) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t part : {fnv1a(request_id), static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(scale),
                             static_cast<std::uint64_t>(copy)})
    h = mix64(h ^ part);
  return h;
}

std::vector<AugmentVariant> expand_schedule(const std::vector<NamedRequest>& requests, const AugmentSchedule& schedule) {
  schedule.validate();
  std::vector<AugmentVariant> out;
  out.reserve(requests.size() * schedule.permutation_ns.size() * schedule.speed_scales.size() * schedule.copies);
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const NamedRequest& base = requests[r];
    for (std::size_t n : schedule.permutation_ns) {
      for (double scale : schedule.speed_scales) {
        for (std::size_t c = 0; c < schedule.copies; ++c) {
          AugmentVariant v;
          v.request_id = base.id;
          v.request_index = r;
          v.permutation_n = n;
          v.speed_scale = scale;
          v.copy = c;
          v.seed = derive_seed(schedule.seed, base.id, n, scale, c);
          v.permute_mode = schedule.permute_mode;
          v.speed_mode = schedule.speed_mode;
          v.request = base.request;
          v.request.seed = v.seed;
          const auto order = permutation_indices(base.request.glosses.size(), n, v.seed, schedule.permute_mode);
          for (std::size_t i = 0; i < order.size(); ++i) {
            v.request.glosses[i] = base.request.glosses[order[i]];
            if (base.request.durations && base.request.durations->size() == order.size())
              (*v.request.durations)[i] = (*base.request.durations)[order[i]];
          }
          out.push_back(std::move(v));
        }
      }
    }
  }
  return out;
}

StitchResult realize_variant(const AugmentVariant& variant, const Dictionary& dict, const EmbeddingTable* emb,
                             const CanonicalSkeleton& skel, const TransitionPolicy& policy) {
  if (variant.speed_mode == SpeedMode::kDurations) {
    StitchRequest req = variant.request;
    std::vector<std::size_t> durations = req.durations ? *req.durations : default_durations(req, dict, emb);
    for (std::size_t& d : durations) d = scaled_length(d, variant.speed_scale);
    req.durations = std::move(durations);
    return stitch(req, dict, emb, skel, policy);
  }
  StitchResult result = stitch(variant.request, dict, emb, skel, policy);
  if (variant.speed_scale == 1.0) return result;
  const std::size_t before = result.poses.frames();
  result.poses = scale_speed(result.poses, variant.speed_scale);
  const std::size_t after = result.poses.frames();
  result.gloss_spans = rescale_spans(result.gloss_spans, before, after);
  result.transition_spans = rescale_spans(result.transition_spans, before, after);
  return result;
}

}  // namespace signstitch
