#include "signstitch/stitcher.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace signstitch {

namespace {

constexpr double kStaticEpsilon = 1e-9;

Resolution resolve_at(const Dictionary& dict, const std::string& gloss, std::size_t position,
                      const EmbeddingTable* emb) {
  try {
    return resolve(dict, gloss, emb);
  } catch (const UnresolvableGlossError& e) {
    throw UnresolvableGlossError(gloss, "at position " + std::to_string(position) + " (" + e.what() + ")");
  }
}

std::size_t native_duration(const DictEntry& entry, double dict_fps, double fps) {
  const double scaled = std::round(static_cast<double>(entry.angles.frames()) * fps / dict_fps);
  return std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
}

}  // namespace

void StitchRequest::validate() const {
  if (glosses.empty()) throw InvalidInputError("stitch request has no glosses");
  if (durations) {
    if (durations->size() != glosses.size())
      throw InvalidInputError("stitch request has " + std::to_string(durations->size()) + " durations for " +
                              std::to_string(glosses.size()) + " glosses");
    for (std::size_t i = 0; i < durations->size(); ++i)
      if ((*durations)[i] == 0) throw InvalidInputError("duration at position " + std::to_string(i) + " is zero");
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigurationError("output fps must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fps / 2.0))
    throw ConfigurationError("cutoff " + std::to_string(cutoff_hz) + " Hz violates Nyquist limit " +
                             std::to_string(fps / 2.0) + " Hz");
}

void TransitionPolicy::validate() const {
  if (boundary_window < 1) throw ConfigurationError("boundary window must be at least 1");
  if (min_frames < 1 || min_frames > max_frames)
    throw ConfigurationError("transition bounds must satisfy 1 <= min_frames <= max_frames");
  if (filter_order < 2 || filter_order % 2 != 0) throw ConfigurationError("filter order must be even and >= 2");
}

std::vector<std::size_t> default_durations(const StitchRequest& req, const Dictionary& dict,
                                           const EmbeddingTable* emb) {
  std::vector<std::size_t> out;
  out.reserve(req.glosses.size());
  for (std::size_t i = 0; i < req.glosses.size(); ++i)
    out.push_back(native_duration(*resolve_at(dict, req.glosses[i], i, emb).entry, dict.fps(), req.fps));
  return out;
}

std::vector<RetrievedSign> retrieve_signs(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                                          const CanonicalSkeleton& skel) {
  req.validate();
  if (dict.angle_width() != skel.angle_count())
    throw SchemaError("dictionary angle width " + std::to_string(dict.angle_width()) + " does not match skeleton (" +
                      std::to_string(skel.angle_count()) + ")");

  std::vector<RetrievedSign> signs;
  signs.reserve(req.glosses.size());
  for (std::size_t i = 0; i < req.glosses.size(); ++i) {
    const Resolution r = resolve_at(dict, req.glosses[i], i, emb);
    const std::size_t duration = req.durations ? (*req.durations)[i] : native_duration(*r.entry, dict.fps(), req.fps);
    PoseSequence poses = resample(forward_kinematics(r.entry->angles, skel), duration);
    poses.set_fps(req.fps);
    signs.push_back({std::move(poses), r.matched_gloss, r.similarity});
  }
  return signs;
}

std::optional<double> boundary_velocity(const PoseSequence& seq, std::size_t window, bool from_end) {
  const std::size_t steps = seq.frames() < 2 ? 0 : seq.frames() - 1;
  const std::size_t k = std::min(window, steps);
  if (k == 0) return std::nullopt;
  double sum = 0.0;
  for (std::size_t s = 0; s < k; ++s) sum += frame_velocity(seq, from_end ? steps - 1 - s : s);
  return sum / static_cast<double>(k);
}

TransitionPlan plan_transition(const PoseSequence& out_seq, const PoseSequence& in_seq,
                               const TransitionPolicy& policy) {
  if (out_seq.empty() || in_seq.empty()) throw InvalidInputError("cannot plan a transition with an empty sequence");
  if (out_seq.keypoints() != in_seq.keypoints()) throw InvalidInputError("sequences have different keypoint counts");

  TransitionPlan plan;
  plan.distance = (in_seq.pose(0) - out_seq.pose(out_seq.frames() - 1)).rowwise().norm().mean();

  const auto v_out = boundary_velocity(out_seq, policy.boundary_window, true);
  const auto v_in = boundary_velocity(in_seq, policy.boundary_window, false);
  if (v_out && v_in)
    plan.boundary_velocity = policy.velocity == BoundaryVelocity::kMax ? std::max(*v_out, *v_in) : std::min(*v_out, *v_in);
  else
    plan.boundary_velocity = v_out ? *v_out : v_in.value_or(0.0);

  const double max_frames = static_cast<double>(policy.max_frames);
  double n = static_cast<double>(policy.min_frames);
  if (plan.boundary_velocity <= kStaticEpsilon) {
    if (plan.distance > kStaticEpsilon) n = max_frames;
  } else {
    n = std::clamp(std::ceil(plan.distance / plan.boundary_velocity), static_cast<double>(policy.min_frames), max_frames);
  }
  plan.frames = static_cast<std::size_t>(n);
  plan.capped = plan.frames == policy.max_frames && plan.distance / (n + 1.0) > plan.boundary_velocity;
  plan.velocity_bound = std::max(plan.boundary_velocity, plan.distance / (n + 1.0));
  return plan;
}

std::vector<PoseFrame> interpolate_transition(const Eigen::Ref<const PoseFrame>& a, const Eigen::Ref<const PoseFrame>& b,
                                              std::size_t n) {
  if (a.rows() != b.rows()) throw InvalidInputError("transition endpoints have different keypoint counts");
  std::vector<PoseFrame> frames;
  frames.reserve(n);
  const PoseFrame delta = b - a;
  for (std::size_t j = 1; j <= n; ++j)
    frames.emplace_back(a + delta * (static_cast<double>(j) / static_cast<double>(n + 1)));
  return frames;
}

StitchResult stitch_unfiltered(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                               const CanonicalSkeleton& skel, const TransitionPolicy& policy) {
  policy.validate();
  std::vector<RetrievedSign> signs = retrieve_signs(req, dict, emb, skel);

  StitchResult result;
  std::size_t total = 0;
  for (const auto& s : signs) total += s.poses.frames();
  result.poses = PoseSequence(skel.keypoint_count(), req.fps, {});
  result.poses.values().reserve((total + signs.size() * policy.max_frames) * skel.keypoint_count() * 3);

  for (std::size_t i = 0; i < signs.size(); ++i) {
    const PoseSequence& sign = signs[i].poses;
    if (i > 0) {
      const PoseSequence& prev = signs[i - 1].poses;
      const TransitionPlan plan = plan_transition(prev, sign, policy);
      const std::size_t start = result.poses.frames();
      for (const PoseFrame& f : interpolate_transition(prev.pose(prev.frames() - 1), sign.pose(0), plan.frames))
        result.poses.append(f);
      result.transition_spans.push_back({start, result.poses.frames()});
      result.transitions.push_back(plan);
    }
    const std::size_t start = result.poses.frames();
    result.poses.append(sign);
    result.gloss_spans.push_back({start, result.poses.frames()});
    result.resolved_glosses.push_back(std::move(signs[i].resolved_gloss));
  }
  return result;
}

std::vector<FrameSpan> rescale_spans(const std::vector<FrameSpan>& spans, std::size_t from, std::size_t to) {
  if (from == 0) throw InvalidInputError("cannot rescale spans of an empty sequence");
  auto map = [&](std::size_t b) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(b) * static_cast<double>(to) / static_cast<double>(from)));
  };
  std::vector<FrameSpan> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back({map(s.start), map(s.end)});
  return out;
}

StitchResult stitch(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                    const CanonicalSkeleton& skel, const TransitionPolicy& policy) {
  StitchResult result = stitch_unfiltered(req, dict, emb, skel, policy);
  result.poses = butterworth_lowpass(result.poses, req.cutoff_hz, policy.filter_order);
  return result;
}

}  // namespace signstitch
