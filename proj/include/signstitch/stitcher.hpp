#pragma once

// Sign stitching: retrieve dictionary signs, resample them to their durations,
// join them with velocity-bounded linear transitions, then smooth the whole
// sequence with a zero-phase Butterworth low-pass.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signstitch/butterworth.hpp"
#include "signstitch/dictionary.hpp"
#include "signstitch/skeleton.hpp"

namespace signstitch {

inline constexpr double kDefaultFps = 25.0;
inline constexpr double kDefaultCutoffHz = 4.0;

struct StitchRequest {
  std::vector<std::string> glosses;
  /// Frames per gloss at the output rate. When absent each sign keeps its
  /// native length rescaled to `fps`.
  std::optional<std::vector<std::size_t>> durations;
  double cutoff_hz = kDefaultCutoffHz;
  double fps = kDefaultFps;
  std::uint64_t seed = 0;

  /// Throws InvalidInputError / ConfigurationError.
  void validate() const;
};

enum class BoundaryVelocity { kMax, kMin };

struct TransitionPolicy {
  std::size_t boundary_window = 3;
  std::size_t min_frames = 1;
  std::size_t max_frames = 12;
  BoundaryVelocity velocity = BoundaryVelocity::kMax;
  int filter_order = 4;

  void validate() const;
};

struct TransitionPlan {
  std::size_t frames = 0;
  double distance = 0.0;           // mean keypoint distance between boundary poses
  double boundary_velocity = 0.0;  // v from the sign boundaries
  /// Largest per-frame mean displacement the transition may show:
  /// max(boundary_velocity, distance / (frames + 1)). Exceeds the boundary
  /// velocity only when the transition length hit max_frames.
  double velocity_bound = 0.0;
  bool capped = false;
};

struct FrameSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - start; }
  bool operator==(const FrameSpan&) const = default;
};

struct RetrievedSign {
  PoseSequence poses;
  std::string resolved_gloss;
  double similarity = 1.0;
};

struct StitchResult {
  PoseSequence poses;
  std::vector<FrameSpan> gloss_spans;
  std::vector<FrameSpan> transition_spans;
  std::vector<std::string> resolved_glosses;
  std::vector<TransitionPlan> transitions;
};

/// Durations used when a request leaves them unset.
std::vector<std::size_t> default_durations(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb);

/// Resolve, forward-kinematics and resample every gloss of the request.
std::vector<RetrievedSign> retrieve_signs(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                                          const CanonicalSkeleton& skel);

/// Mean boundary velocity over the first (`from_end` false) or last `window`
/// frame steps; nullopt for a single-frame sequence.
std::optional<double> boundary_velocity(const PoseSequence& seq, std::size_t window, bool from_end);

TransitionPlan plan_transition(const PoseSequence& out_seq, const PoseSequence& in_seq, const TransitionPolicy& policy);

/// `n` frames strictly between `a` and `b`; frame j (1-based) sits at j/(n+1).
std::vector<PoseFrame> interpolate_transition(const Eigen::Ref<const PoseFrame>& a, const Eigen::Ref<const PoseFrame>& b,
                                              std::size_t n);

/// Retrieval and concatenation without the final motion filter.
StitchResult stitch_unfiltered(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                               const CanonicalSkeleton& skel, const TransitionPolicy& policy = {});

/// Maps span boundaries from a `from`-frame grid onto a `to`-frame grid.
std::vector<FrameSpan> rescale_spans(const std::vector<FrameSpan>& spans, std::size_t from, std::size_t to);

StitchResult stitch(const StitchRequest& req, const Dictionary& dict, const EmbeddingTable* emb,
                    const CanonicalSkeleton& skel, const TransitionPolicy& policy = {});

}  // namespace signstitch
