// Built-in reference skeleton and the JSON skeleton document.

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "signstitch/skeleton.hpp"

namespace signstitch {

namespace {

using nlohmann::json;

constexpr int kSkeletonVersion = 1;

struct Builder {
  JointLayout layout;
  std::vector<double> lengths;
  std::vector<Vec3> directions;
  std::vector<CanonicalSkeleton::Joint> joints;

  int add(std::string name, BodyPart part, int parent, const Vec3& offset) {
    layout.names.push_back(std::move(name));
    layout.parts.push_back(part);
    layout.parents.push_back(parent);
    lengths.push_back(parent < 0 ? 0.0 : offset.norm());
    directions.push_back(parent < 0 ? Vec3::Zero() : Vec3(offset.normalized()));
    return static_cast<int>(layout.names.size()) - 1;
  }

  void articulate(int keypoint, std::string axes) { joints.push_back({keypoint, std::move(axes)}); }
};

// MediaPipe hand order: wrist, then four keypoints per finger from thumb to
// pinky. `mirror` is +1 for the left hand (thumb towards +x) and -1 for the right.
void add_hand(Builder& b, BodyPart part, const std::string& side, int body_wrist, double mirror) {
  static const char* kFingers[] = {"thumb", "index", "middle", "ring", "pinky"};
  static const char* kThumbJoints[] = {"cmc", "mcp", "ip", "tip"};
  static const char* kFingerJoints[] = {"mcp", "pip", "dip", "tip"};
  // Base offsets from the hand root and per-segment lengths for each finger.
  static const double kBase[5][3] = {{0.020, -0.020, 0.010},
                                     {0.020, -0.080, 0.0},
                                     {0.005, -0.085, 0.0},
                                     {-0.010, -0.080, 0.0},
                                     {-0.025, -0.070, 0.0}};
  static const double kSegments[5][3] = {{0.035, 0.032, 0.026},
                                         {0.042, 0.026, 0.022},
                                         {0.046, 0.029, 0.024},
                                         {0.043, 0.027, 0.023},
                                         {0.034, 0.021, 0.020}};

  const int root = b.add(side + "_hand_wrist", part, body_wrist, Vec3(0.0, -0.02, 0.0));
  b.articulate(root, "xyz");
  for (int f = 0; f < 5; ++f) {
    const char* const* names = f == 0 ? kThumbJoints : kFingerJoints;
    const std::string prefix = side + "_" + kFingers[f] + "_";
    const Vec3 base(mirror * kBase[f][0], kBase[f][1], kBase[f][2]);
    int parent = b.add(prefix + names[0], part, root, base);
    const Vec3 dir = Vec3(base.x() * 0.4, base.y(), base.z()).normalized();
    for (int s = 0; s < 3; ++s) {
      b.articulate(parent, s < 2 ? "xyz" : "xz");
      parent = b.add(prefix + names[s + 1], part, parent, kSegments[f][s] * dir);
    }
  }
}

CanonicalSkeleton build_reference() {
  Builder b;
  // Body keypoint indices are fixed by the partition order below.
  const int lh_count = static_cast<int>(kHandKeypoints);
  const int neck = 2 * lh_count;
  const int l_wrist = neck + 4;
  const int r_wrist = neck + 7;

  add_hand(b, BodyPart::kLeftHand, "left", l_wrist, 1.0);
  add_hand(b, BodyPart::kRightHand, "right", r_wrist, -1.0);

  const BodyPart body = BodyPart::kBody;
  b.add("neck", body, -1, Vec3::Zero());
  const int head = b.add("head", body, neck, Vec3(0.0, 0.22, 0.0));
  const int l_sh = b.add("left_shoulder", body, neck, Vec3(-0.20, 0.0, 0.0));
  const int l_el = b.add("left_elbow", body, l_sh, Vec3(0.0, -0.28, 0.0));
  b.add("left_wrist", body, l_el, Vec3(0.0, -0.25, 0.0));
  const int r_sh = b.add("right_shoulder", body, neck, Vec3(0.20, 0.0, 0.0));
  const int r_el = b.add("right_elbow", body, r_sh, Vec3(0.0, -0.28, 0.0));
  b.add("right_wrist", body, r_el, Vec3(0.0, -0.25, 0.0));
  const int hip = b.add("mid_hip", body, neck, Vec3(0.0, -0.50, 0.0));

  const BodyPart face = BodyPart::kFace;
  b.add("nose", face, head, Vec3(0.0, 0.0, 0.10));
  b.add("left_eye", face, head, Vec3(-0.035, 0.03, 0.08));
  b.add("right_eye", face, head, Vec3(0.035, 0.03, 0.08));
  b.add("left_ear", face, head, Vec3(-0.075, 0.0, 0.0));
  b.add("right_ear", face, head, Vec3(0.075, 0.0, 0.0));
  b.add("mouth_left", face, head, Vec3(-0.025, -0.05, 0.08));
  b.add("mouth_right", face, head, Vec3(0.025, -0.05, 0.08));
  b.add("upper_lip", face, head, Vec3(0.0, -0.04, 0.09));
  b.add("lower_lip", face, head, Vec3(0.0, -0.06, 0.085));
  b.add("chin", face, head, Vec3(0.0, -0.10, 0.06));

  b.articulate(neck, "xyz");
  b.articulate(head, "xyz");
  b.articulate(l_sh, "xyz");
  b.articulate(r_sh, "xyz");
  b.articulate(l_el, "xz");
  b.articulate(r_el, "xz");
  b.articulate(l_wrist, "y");
  b.articulate(r_wrist, "y");

  b.layout.neck = neck;
  b.layout.shoulders = {l_sh, r_sh};
  b.layout.torso = hip;

  std::vector<CanonicalSkeleton::AngleSlot> slots;
  for (std::size_t j = 0; j < b.joints.size(); ++j)
    for (char axis : b.joints[j].axes) slots.push_back({static_cast<int>(j), axis});

  CanonicalSkeleton skel(std::move(b.layout), std::move(b.lengths), std::move(b.directions), std::move(b.joints),
                         std::move(slots), "reference-61");
  skel.check_canonical_sizes();
  return skel;
}

template <class T>
T required(const json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + ": field '" + key + "' has the wrong type");
  }
}

BodyPart part_from_string(const std::string& s, const std::string& where) {
  for (BodyPart p : {BodyPart::kLeftHand, BodyPart::kRightHand, BodyPart::kBody, BodyPart::kFace})
    if (s == to_string(p)) return p;
  throw SchemaError(where + ": unknown part '" + s + "'");
}

BodyPart part_by_position(std::size_t k) {
  if (k < kHandKeypoints) return BodyPart::kLeftHand;
  if (k < 2 * kHandKeypoints) return BodyPart::kRightHand;
  if (k < 2 * kHandKeypoints + kBodyKeypoints) return BodyPart::kBody;
  return BodyPart::kFace;
}

}  // namespace

const CanonicalSkeleton& reference_skeleton() {
  static const CanonicalSkeleton skel = build_reference();
  return skel;
}

CanonicalSkeleton load_skeleton(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("skeleton file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("skeleton file must hold a JSON object");
  if (required<int>(doc, "version", "skeleton") != kSkeletonVersion)
    throw SchemaError("unsupported skeleton version");

  const json& kps = doc.value("keypoints", json::array());
  const json& joints_doc = doc.value("joints", json::array());
  const json& slots_doc = doc.value("angle_slots", json::array());
  if (!kps.is_array() || kps.size() != kKeypointCount)
    throw SchemaError("skeleton must list " + std::to_string(kKeypointCount) + " keypoints, found " +
                      std::to_string(kps.is_array() ? kps.size() : 0));
  if (!slots_doc.is_array() || slots_doc.size() != kAngleCount)
    throw SchemaError("skeleton must list " + std::to_string(kAngleCount) + " angle slots, found " +
                      std::to_string(slots_doc.is_array() ? slots_doc.size() : 0));

  JointLayout layout;
  std::vector<double> lengths;
  std::vector<Vec3> dirs;
  std::map<std::string, int> by_name;
  for (std::size_t k = 0; k < kps.size(); ++k) {
    const json& kp = kps[k];
    const std::string where = "keypoint " + std::to_string(k);
    auto name = required<std::string>(kp, "name", where);
    if (!by_name.emplace(name, static_cast<int>(k)).second) throw SchemaError(where + ": duplicate name '" + name + "'");
    layout.names.push_back(std::move(name));
    layout.parents.push_back(kp.contains("parent") && !kp["parent"].is_null() ? required<int>(kp, "parent", where) : -1);
    layout.parts.push_back(kp.contains("part") ? part_from_string(required<std::string>(kp, "part", where), where)
                                               : part_by_position(k));
    lengths.push_back(kp.value("bone_length", 0.0));
    const auto d = kp.value("rest_direction", std::vector<double>{0.0, 0.0, 0.0});
    if (d.size() != 3) throw SchemaError(where + ": rest_direction must have 3 components");
    dirs.emplace_back(d[0], d[1], d[2]);
  }

  const json landmarks = doc.value("landmarks", json::object());
  auto landmark = [&](const char* key, const char* fallback) {
    std::string name = fallback;
    if (landmarks.contains(key)) {
      if (landmarks[key].is_null()) return -1;
      if (!landmarks[key].is_string()) throw SchemaError(std::string("landmark '") + key + "' must be a name");
      name = landmarks[key].get<std::string>();
    }
    auto it = by_name.find(name);
    return it == by_name.end() ? -1 : it->second;
  };
  layout.neck = landmark("neck", "neck");
  layout.shoulders = {landmark("left_shoulder", "left_shoulder"), landmark("right_shoulder", "right_shoulder")};
  layout.torso = landmark("torso", "mid_hip");

  std::vector<CanonicalSkeleton::Joint> joints;
  for (std::size_t j = 0; j < joints_doc.size(); ++j) {
    const std::string where = "joint " + std::to_string(j);
    CanonicalSkeleton::Joint joint{required<int>(joints_doc[j], "keypoint", where),
                                   required<std::string>(joints_doc[j], "axes", where)};
    if (joints_doc[j].contains("dof") && required<std::size_t>(joints_doc[j], "dof", where) != joint.dof())
      throw SchemaError(where + ": dof does not match axes");
    joints.push_back(std::move(joint));
  }
  std::vector<CanonicalSkeleton::AngleSlot> slots;
  for (std::size_t s = 0; s < slots_doc.size(); ++s) {
    const std::string where = "angle slot " + std::to_string(s);
    const auto axis = required<std::string>(slots_doc[s], "axis", where);
    if (axis.size() != 1) throw SchemaError(where + ": axis must be one of x, y, z");
    slots.push_back({required<int>(slots_doc[s], "joint", where), axis[0]});
  }

  CanonicalSkeleton skel(std::move(layout), std::move(lengths), std::move(dirs), std::move(joints), std::move(slots),
                         doc.value("id", std::string("custom")));
  skel.check_canonical_sizes();
  return skel;
}

CanonicalSkeleton load_skeleton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open skeleton file '" + path + "'");
  return load_skeleton(in);
}

void save_skeleton(const CanonicalSkeleton& skel, std::ostream& out) {
  const JointLayout& layout = skel.layout();
  json kps = json::array();
  for (std::size_t k = 0; k < skel.keypoint_count(); ++k) {
    const Vec3& d = skel.rest_directions()[k];
    kps.push_back({{"name", layout.names[k]},
                   {"parent", layout.parents[k] < 0 ? json(nullptr) : json(layout.parents[k])},
                   {"part", to_string(layout.parts[k])},
                   {"bone_length", skel.bone_lengths()[k]},
                   {"rest_direction", {d.x(), d.y(), d.z()}}});
  }
  json joints = json::array();
  for (const auto& j : skel.joints()) joints.push_back({{"keypoint", j.keypoint}, {"dof", j.dof()}, {"axes", j.axes}});
  json slots = json::array();
  for (const auto& s : skel.slots()) slots.push_back({{"joint", s.joint}, {"axis", std::string(1, s.axis)}});
  auto name_of = [&](int k) { return k < 0 ? json(nullptr) : json(layout.names[k]); };
  json doc = {{"version", kSkeletonVersion},
              {"id", skel.id()},
              {"landmarks",
               {{"neck", name_of(layout.neck)},
                {"left_shoulder", name_of(layout.shoulders.first)},
                {"right_shoulder", name_of(layout.shoulders.second)},
                {"torso", name_of(layout.torso)}}},
              {"keypoints", std::move(kps)},
              {"joints", std::move(joints)},
              {"angle_slots", std::move(slots)}};
  out << doc.dump(1) << '\n';
}

}  // namespace signstitch
