#include "signstitch/pose_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include <nlohmann/json.hpp>

namespace signstitch {

namespace {

using nlohmann::json;

template <class T>
void put_le(std::string& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

void check_writable(const PoseSequence& seq) {
  if (seq.keypoints() != kKeypointCount)
    throw InvalidInputError("pose files hold " + std::to_string(kKeypointCount) + " keypoints, sequence has " +
                            std::to_string(seq.keypoints()));
  if (seq.frames() > 0xFFFFFFFFull) throw InvalidInputError("sequence too long for pose file");
}

json spans_json(const std::vector<FrameSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back({s.start, s.end});
  return out;
}

}  // namespace

void write_sspk(const PoseSequence& seq, std::ostream& out) {
  check_writable(seq);
  std::string buf;
  buf.reserve(kSspkHeaderSize + seq.values().size() * 4);
  buf.append(kSspkMagic, 4);
  put_le(buf, kSspkVersion);
  put_le(buf, static_cast<std::uint16_t>(seq.keypoints()));
  put_le(buf, static_cast<std::uint32_t>(seq.frames()));
  put_le(buf, static_cast<float>(seq.fps()));
  for (double v : seq.values()) put_le(buf, static_cast<float>(v));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed to write pose data");
}

PoseSequence read_sspk(std::istream& in) {
  unsigned char header[kSspkHeaderSize];
  if (!in.read(reinterpret_cast<char*>(header), kSspkHeaderSize)) throw FormatError("SSPK header truncated");
  if (std::memcmp(header, kSspkMagic, 4) != 0) throw FormatError("bad SSPK magic");
  const auto version = get_le<std::uint16_t>(header + 4);
  if (version != kSspkVersion) throw FormatError("unsupported SSPK version " + std::to_string(version));
  const auto keypoints = get_le<std::uint16_t>(header + 6);
  if (keypoints != kKeypointCount) throw FormatError("SSPK keypoint count " + std::to_string(keypoints) + " != 61");
  const auto frames = get_le<std::uint32_t>(header + 8);
  const auto fps = get_le<float>(header + 12);
  if (!(fps > 0.0f) || !std::isfinite(fps)) throw FormatError("SSPK fps is not positive");
  if (frames == 0) throw FormatError("SSPK file has no frames");

  const std::size_t count = static_cast<std::size_t>(frames) * keypoints * 3;
  std::string payload(count * 4, '\0');
  if (!in.read(payload.data(), static_cast<std::streamsize>(payload.size())))
    throw FormatError("SSPK payload truncated: expected " + std::to_string(frames) + " frames");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("SSPK file has trailing bytes");

  std::vector<double> values(count);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < count; ++i) {
    const float v = get_le<float>(p + 4 * i);
    if (!std::isfinite(v)) throw FormatError("SSPK payload contains a non-finite coordinate");
    values[i] = v;
  }
  return PoseSequence(keypoints, fps, std::move(values));
}

void write_pose_json(const PoseSequence& seq, std::ostream& out) {
  check_writable(seq);
  json coords = json::array();
  for (std::size_t i = 0; i < seq.frames(); ++i) {
    json frame = json::array();
    for (double v : seq.frame(i)) frame.push_back(static_cast<float>(v));
    coords.push_back(std::move(frame));
  }
  json doc = {{"magic", "SSPK"},
              {"version", kSspkVersion},
              {"keypoints", seq.keypoints()},
              {"frames", seq.frames()},
              {"fps", static_cast<float>(seq.fps())},
              {"coords", std::move(coords)}};
  out << doc.dump() << '\n';
}

PoseSequence read_pose_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("pose JSON is not valid: ") + e.what());
  }
  try {
    if (doc.at("magic").get<std::string>() != "SSPK" || doc.at("version").get<int>() != kSspkVersion)
      throw FormatError("pose JSON has wrong magic or version");
    const auto keypoints = doc.at("keypoints").get<std::size_t>();
    if (keypoints != kKeypointCount) throw FormatError("pose JSON keypoint count must be 61");
    const auto frames = doc.at("frames").get<std::size_t>();
    const auto& coords = doc.at("coords");
    if (frames == 0 || coords.size() != frames) throw FormatError("pose JSON frame count mismatch");
    std::vector<double> values;
    values.reserve(frames * keypoints * 3);
    for (const auto& frame : coords) {
      if (frame.size() != keypoints * 3) throw FormatError("pose JSON frame has wrong width");
      for (const auto& v : frame) values.push_back(static_cast<float>(v.get<double>()));
    }
    return PoseSequence(keypoints, static_cast<float>(doc.at("fps").get<double>()), std::move(values));
  } catch (const json::exception& e) {
    throw FormatError(std::string("pose JSON is malformed: ") + e.what());
  }
}

void write_pose_file(const PoseSequence& seq, const std::string& path, PoseFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  if (format == PoseFormat::kSspk)
    write_sspk(seq, out);
  else
    write_pose_json(seq, out);
}

PoseSequence read_pose_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open pose file '" + path + "'");
  if (in.peek() == '{') return read_pose_json(in);
  return read_sspk(in);
}

void write_sidecar(const StitchResult& result, std::ostream& out) {
  json doc = {{"gloss_spans", spans_json(result.gloss_spans)},
              {"transition_spans", spans_json(result.transition_spans)},
              {"resolved_glosses", result.resolved_glosses}};
  out << doc.dump() << '\n';
}

}  // namespace signstitch
