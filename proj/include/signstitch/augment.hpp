#pragma once

// Gloss-order permutation and speed variation for stitched sequences, and the
// expansion of a request list into a full augmentation sweep.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "signstitch/stitcher.hpp"

namespace signstitch {

enum class PermuteMode { kWindow, kSwaps };
enum class SpeedMode { kSequence, kDurations };

const char* to_string(PermuteMode mode);
const char* to_string(SpeedMode mode);

/// All randomness goes through mt19937_64 and the rejection sampler below, so
/// results do not depend on the standard library's distribution classes.
using Generator = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling on raw 64-bit draws.
std::uint64_t uniform_below(Generator& gen, std::uint64_t bound);

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Index permutation of `count` items.
///   kWindow: draw a window start uniformly among the count-w+1 positions
///            (w = min(n, count)), then Fisher-Yates shuffle the window.
///   kSwaps:  n independent swaps of a uniformly chosen adjacent pair.
/// n == 0 is the identity in both modes.
std::vector<std::size_t> permutation_indices(std::size_t count, std::size_t n, std::uint64_t seed,
                                             PermuteMode mode = PermuteMode::kWindow);

std::vector<std::string> permute_glosses(const std::vector<std::string>& glosses, std::size_t n, std::uint64_t seed,
                                         PermuteMode mode = PermuteMode::kWindow);

/// round(frames * scale); throws InvalidInputError when that is zero.
std::size_t scaled_length(std::size_t frames, double scale);

/// Resamples to round(U * scale) frames; fps is left unchanged.
PoseSequence scale_speed(const PoseSequence& poses, double scale);

struct AugmentSchedule {
  std::vector<std::size_t> permutation_ns{0};
  std::vector<double> speed_scales{1.0};
  std::size_t copies = 1;
  std::uint64_t seed = 0;
  PermuteMode permute_mode = PermuteMode::kWindow;
  SpeedMode speed_mode = SpeedMode::kSequence;

  void validate() const;
};

AugmentSchedule load_schedule(std::istream& in);
AugmentSchedule load_schedule_file(const std::string& path);

struct NamedRequest {
  std::string id;
  StitchRequest request;
};

struct AugmentVariant {
  std::string request_id;
  std::size_t request_index = 0;
  std::size_t permutation_n = 0;
  double speed_scale = 1.0;
  std::size_t copy = 0;
  std::uint64_t seed = 0;
  PermuteMode permute_mode = PermuteMode::kWindow;
  SpeedMode speed_mode = SpeedMode::kSequence;
  /// Request with glosses (and durations) already permuted.
  StitchRequest request;

  /// "{id}.N{n}.s{scale}.c{copy}"
  std::string name() const;
};

std::uint64_t derive_seed(std::uint64_t base, const std::string& request_id, std::size_t n, double scale,
                          std::size_t copy);

/// |requests| x |Ns| x |scales| x copies variants, in that nesting order.
std::vector<AugmentVariant> expand_schedule(const std::vector<NamedRequest>& requests, const AugmentSchedule& schedule);

/// Stitches a variant and applies its speed change. In sequence mode the final
/// sequence is resampled and spans are mapped onto the new frame grid; in
/// durations mode every gloss duration is scaled before stitching.
StitchResult realize_variant(const AugmentVariant& variant, const Dictionary& dict, const EmbeddingTable* emb,
                             const CanonicalSkeleton& skel, const TransitionPolicy& policy = {});

}  // namespace signstitch
