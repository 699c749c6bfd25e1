#pragma once

// Pose sequence files.
//
// SSPK binary layout, all little-endian:
//   char[4] magic "SSPK" | u16 version (1) | u16 keypoints (61) | u32 frames |
//   f32 fps | frames * keypoints * 3 f32, frame-major, xyz per keypoint.
// The JSON form carries the same fields with coordinates as f32 values.

#include <iosfwd>
#include <string>

#include "signstitch/stitcher.hpp"

namespace signstitch {

enum class PoseFormat { kSspk, kJson };

inline constexpr char kSspkMagic[4] = {'S', 'S', 'P', 'K'};
inline constexpr std::uint16_t kSspkVersion = 1;
inline constexpr std::size_t kSspkHeaderSize = 16;

void write_sspk(const PoseSequence& seq, std::ostream& out);
/// Throws FormatError on a bad magic, version, keypoint count or truncation.
PoseSequence read_sspk(std::istream& in);

void write_pose_json(const PoseSequence& seq, std::ostream& out);
PoseSequence read_pose_json(std::istream& in);

void write_pose_file(const PoseSequence& seq, const std::string& path, PoseFormat format);
PoseSequence read_pose_file(const std::string& path);

/// {gloss_spans, transition_spans, resolved_glosses} with spans as [start, end).
void write_sidecar(const StitchResult& result, std::ostream& out);

}  // namespace signstitch
