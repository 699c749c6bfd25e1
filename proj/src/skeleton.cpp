#include "signstitch/skeleton.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace signstitch {

namespace {

constexpr double kUnitTolerance = 1e-9;

int axis_index(char axis) {
  switch (axis) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    default: return -1;
  }
}

Mat3 axis_rotation(int axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  switch (axis) {
    case 0: r << 1, 0, 0, 0, c, -s, 0, s, c; break;
    case 1: r << c, 0, s, 0, 1, 0, -s, 0, c; break;
    default: r << c, -s, 0, s, c, 0, 0, 0, 1; break;
  }
  return r;
}

std::string describe(const JointLayout& layout, int k) {
  std::ostringstream os;
  os << "keypoint " << k;
  if (k >= 0 && static_cast<std::size_t>(k) < layout.names.size()) os << " ('" << layout.names[k] << "')";
  return os.str();
}

}  // namespace

const char* to_string(BodyPart part) {
  switch (part) {
    case BodyPart::kLeftHand: return "left_hand";
    case BodyPart::kRightHand: return "right_hand";
    case BodyPart::kBody: return "body";
    case BodyPart::kFace: return "face";
  }
  return "?";
}

int JointLayout::root() const {
  for (std::size_t k = 0; k < parents.size(); ++k)
    if (parents[k] < 0) return static_cast<int>(k);
  return -1;
}

CanonicalSkeleton::CanonicalSkeleton(JointLayout layout, std::vector<double> bone_lengths,
                                     std::vector<Vec3> rest_directions, std::vector<Joint> joints,
                                     std::vector<AngleSlot> slots, std::string id)
    : layout_(std::move(layout)),
      bone_lengths_(std::move(bone_lengths)),
      rest_directions_(std::move(rest_directions)),
      joints_(std::move(joints)),
      slots_(std::move(slots)),
      id_(std::move(id)) {
  const std::size_t n = layout_.names.size();
  if (n == 0) throw SchemaError("skeleton has no keypoints");
  if (layout_.parents.size() != n || layout_.parts.size() != n || bone_lengths_.size() != n ||
      rest_directions_.size() != n)
    throw SchemaError("skeleton keypoint arrays differ in length");

  // Parent graph must be a single tree.
  int root = -1;
  std::vector<std::vector<int>> children(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int p = layout_.parents[k];
    if (p < 0) {
      if (root >= 0) throw SchemaError("skeleton has more than one root");
      root = static_cast<int>(k);
    } else if (static_cast<std::size_t>(p) >= n || p == static_cast<int>(k)) {
      throw SchemaError(describe(layout_, static_cast<int>(k)) + " has invalid parent");
    } else {
      children[p].push_back(static_cast<int>(k));
    }
  }
  if (root < 0) throw SchemaError("skeleton has no root");
  if (layout_.parts[root] != BodyPart::kBody) throw SchemaError("skeleton root must be a body keypoint");

  order_.reserve(n);
  order_.push_back(root);
  for (std::size_t head = 0; head < order_.size(); ++head)
    for (int c : children[order_[head]]) order_.push_back(c);
  if (order_.size() != n) throw SchemaError("skeleton parent graph contains a cycle");

  for (std::size_t k = 0; k < n; ++k) {
    if (static_cast<int>(k) == root) continue;
    if (!(bone_lengths_[k] > 0.0) || !std::isfinite(bone_lengths_[k]))
      throw SchemaError(describe(layout_, static_cast<int>(k)) + " has non-positive bone length");
    if (std::abs(rest_directions_[k].norm() - 1.0) > kUnitTolerance)
      throw SchemaError(describe(layout_, static_cast<int>(k)) + " rest direction is not unit length");
  }

  auto check_landmark = [&](int k, const char* what) {
    if (k < 0) return;
    if (static_cast<std::size_t>(k) >= n || layout_.parts[k] != BodyPart::kBody)
      throw SchemaError(std::string(what) + " must be a body keypoint");
  };
  check_landmark(layout_.neck, "neck");
  check_landmark(layout_.shoulders.first, "left shoulder");
  check_landmark(layout_.shoulders.second, "right shoulder");
  check_landmark(layout_.torso, "torso");

  joint_of_keypoint_.assign(n, -1);
  slot_of_axis_.assign(joints_.size(), {-1, -1, -1});
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const Joint& joint = joints_[j];
    if (joint.keypoint < 0 || static_cast<std::size_t>(joint.keypoint) >= n)
      throw SchemaError("joint " + std::to_string(j) + " references unknown keypoint");
    if (joint_of_keypoint_[joint.keypoint] >= 0)
      throw SchemaError(describe(layout_, joint.keypoint) + " has more than one joint");
    if (joint.axes.empty() || joint.axes.size() > 3)
      throw SchemaError("joint " + std::to_string(j) + " must have 1 to 3 degrees of freedom");
    int last = -1;
    for (char a : joint.axes) {
      const int idx = axis_index(a);
      if (idx <= last) throw SchemaError("joint " + std::to_string(j) + " axes must be an ordered subset of xyz");
      last = idx;
    }
    joint_of_keypoint_[joint.keypoint] = static_cast<int>(j);
  }

  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const AngleSlot& slot = slots_[s];
    if (slot.joint < 0 || static_cast<std::size_t>(slot.joint) >= joints_.size())
      throw SchemaError("angle slot " + std::to_string(s) + " references unknown joint");
    const int axis = axis_index(slot.axis);
    if (axis < 0 || joints_[slot.joint].axes.find(slot.axis) == std::string::npos)
      throw SchemaError("angle slot " + std::to_string(s) + " uses an axis its joint does not expose");
    int& target = slot_of_axis_[slot.joint][axis];
    if (target >= 0) throw SchemaError("angle slot " + std::to_string(s) + " duplicates a joint axis");
    target = static_cast<int>(s);
  }
  for (std::size_t j = 0; j < joints_.size(); ++j)
    for (char a : joints_[j].axes)
      if (slot_of_axis_[j][axis_index(a)] < 0)
        throw SchemaError("joint " + std::to_string(j) + " axis '" + std::string(1, a) + "' has no angle slot");
}

void CanonicalSkeleton::check_canonical_sizes() const {
  if (keypoint_count() != kKeypointCount)
    throw SchemaError("skeleton must have " + std::to_string(kKeypointCount) + " keypoints, found " +
                      std::to_string(keypoint_count()));
  if (angle_count() != kAngleCount)
    throw SchemaError("skeleton must have " + std::to_string(kAngleCount) + " angle slots, found " +
                      std::to_string(angle_count()));
  const std::array<std::pair<BodyPart, std::size_t>, 4> partition{{{BodyPart::kLeftHand, kHandKeypoints},
                                                                   {BodyPart::kRightHand, kHandKeypoints},
                                                                   {BodyPart::kBody, kBodyKeypoints},
                                                                   {BodyPart::kFace, kFaceKeypoints}}};
  std::size_t k = 0;
  for (auto [part, count] : partition)
    for (std::size_t i = 0; i < count; ++i, ++k)
      if (layout_.parts[k] != part)
        throw SchemaError(describe(layout_, static_cast<int>(k)) + " should belong to " + to_string(part));
  if (layout_.neck < 0 || layout_.shoulders.first < 0 || layout_.shoulders.second < 0)
    throw SchemaError("skeleton must name neck and shoulder keypoints");
}

PoseFrame CanonicalSkeleton::rest_pose() const {
  return forward_kinematics(AngleFrame::Zero(static_cast<Eigen::Index>(angle_count())), *this);
}

void CanonicalSkeleton::forward(std::span<const double> angles, std::span<double> out) const {
  if (angles.size() != angle_count())
    throw InvalidInputError("expected " + std::to_string(angle_count()) + " angles, got " +
                            std::to_string(angles.size()));
  if (out.size() != keypoint_count() * 3) throw InvalidInputError("pose output buffer has wrong size");
  for (std::size_t s = 0; s < angles.size(); ++s)
    if (!std::isfinite(angles[s])) throw InvalidInputError("angle slot " + std::to_string(s) + " is not finite");

  thread_local std::vector<Mat3> world;
  world.resize(keypoint_count());
  for (int k : order_) {
    Mat3 local = Mat3::Identity();
    if (const int j = joint_of_keypoint_[k]; j >= 0) {
      for (int axis = 0; axis < 3; ++axis)
        if (const int s = slot_of_axis_[j][axis]; s >= 0) local = local * axis_rotation(axis, angles[s]);
    }
    Eigen::Map<Vec3> pos(out.data() + 3 * k);
    const int p = layout_.parents[k];
    if (p < 0) {
      pos.setZero();
      world[k] = local;
    } else {
      pos = Eigen::Map<const Vec3>(out.data() + 3 * p) + world[p] * (bone_lengths_[k] * rest_directions_[k]);
      world[k] = world[p] * local;
    }
  }
}

FrameBuffer::FrameBuffer(std::size_t width, double fps, std::vector<double> values)
    : width_(width), fps_(fps), values_(std::move(values)) {
  if (width_ == 0) throw InvalidInputError("frame width must be positive");
  if (values_.size() % width_ != 0) throw InvalidInputError("value count is not a multiple of the frame width");
  set_fps(fps);
}

void FrameBuffer::set_fps(double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInputError("fps must be positive");
  fps_ = fps;
}

AngleFrame AngleSequence::frame_vector(std::size_t i) const {
  auto f = frame(i);
  return Eigen::Map<const AngleFrame>(f.data(), static_cast<Eigen::Index>(f.size()));
}

void PoseSequence::append(const Eigen::Ref<const PoseFrame>& frame) {
  if (static_cast<std::size_t>(frame.rows()) != keypoints())
    throw InvalidInputError("appended frame has wrong keypoint count");
  for (Eigen::Index r = 0; r < frame.rows(); ++r)
    for (Eigen::Index c = 0; c < 3; ++c) values_.push_back(frame(r, c));
}

void PoseSequence::append(const PoseSequence& other) {
  if (other.keypoints() != keypoints()) throw InvalidInputError("appended sequence has wrong keypoint count");
  values_.insert(values_.end(), other.values().begin(), other.values().end());
}

PoseFrame forward_kinematics(const AngleFrame& angles, const CanonicalSkeleton& skel) {
  PoseFrame pose(static_cast<Eigen::Index>(skel.keypoint_count()), 3);
  skel.forward({angles.data(), static_cast<std::size_t>(angles.size())}, {pose.data(), static_cast<std::size_t>(pose.size())});
  return pose;
}

PoseSequence forward_kinematics(const AngleSequence& angles, const CanonicalSkeleton& skel) {
  const std::size_t width = skel.keypoint_count() * 3;
  std::vector<double> values(angles.frames() * width);
  for (std::size_t i = 0; i < angles.frames(); ++i)
    skel.forward(angles.frame(i), {values.data() + i * width, width});
  return PoseSequence(skel.keypoint_count(), angles.fps(), std::move(values));
}

PoseSequence normalize_pose(const PoseSequence& seq, const JointLayout& layout) {
  const auto [left, right] = layout.shoulders;
  const std::size_t n = seq.keypoints();
  auto in_range = [n](int k) { return k >= 0 && static_cast<std::size_t>(k) < n; };
  if (!in_range(layout.neck) || !in_range(left) || !in_range(right))
    throw InvalidInputError("layout does not provide neck and shoulder keypoints for this sequence");
  const bool has_torso = in_range(layout.torso);

  PoseSequence out = seq;
  for (std::size_t i = 0; i < seq.frames(); ++i) {
    auto pose = out.pose(i);
    const Vec3 neck = pose.row(layout.neck).transpose();
    Vec3 x_axis = (pose.row(right) - pose.row(left)).transpose();
    const double span = x_axis.norm();
    if (!(span > 1e-12)) throw DegenerateFrameError(i, "shoulder keypoints coincide");
    x_axis /= span;

    Mat3 rotation;
    Vec3 down = Vec3::Zero();
    if (has_torso) {
      down = (pose.row(layout.torso).transpose() - neck);
      down -= down.dot(x_axis) * x_axis;
    }
    if (down.norm() > 1e-12) {
      const Vec3 y_axis = -down.normalized();
      rotation.row(0) = x_axis.transpose();
      rotation.row(1) = y_axis.transpose();
      rotation.row(2) = x_axis.cross(y_axis).transpose();
    } else {
      rotation = Eigen::Quaterniond::FromTwoVectors(x_axis, Vec3::UnitX()).toRotationMatrix();
    }
    for (Eigen::Index k = 0; k < pose.rows(); ++k)
      pose.row(k) = (rotation * (pose.row(k).transpose() - neck)).transpose();
    pose.row(layout.neck).setZero();
  }
  return out;
}

namespace {

std::vector<double> resample_values(const FrameBuffer& seq, std::size_t target_len) {
  if (target_len == 0) throw InvalidInputError("resample target length must be at least 1");
  if (seq.empty()) throw InvalidInputError("cannot resample an empty sequence");
  const std::size_t width = seq.width();
  const std::size_t frames = seq.frames();
  std::vector<double> out(target_len * width);
  for (std::size_t j = 0; j < target_len; ++j) {
    double* dst = out.data() + j * width;
    std::size_t i0 = 0;
    double frac = 0.0;
    if (target_len > 1) {
      const double t = static_cast<double>(j) * static_cast<double>(frames - 1) / static_cast<double>(target_len - 1);
      i0 = std::min(static_cast<std::size_t>(std::floor(t)), frames - 1);
      frac = t - static_cast<double>(i0);
    }
    auto a = seq.frame(i0);
    if (frac == 0.0 || i0 + 1 >= frames) {
      std::copy(a.begin(), a.end(), dst);
      continue;
    }
    auto b = seq.frame(i0 + 1);
    for (std::size_t c = 0; c < width; ++c) dst[c] = a[c] + (b[c] - a[c]) * frac;
  }
  return out;
}

}  // namespace

PoseSequence resample(const PoseSequence& seq, std::size_t target_len) {
  return PoseSequence(seq.keypoints(), seq.fps(), resample_values(seq, target_len));
}

AngleSequence resample(const AngleSequence& seq, std::size_t target_len) {
  AngleSequence wrapped = seq;
  for (double& v : wrapped.values()) v = wrap_angle(v);
  return AngleSequence(seq.width(), seq.fps(), resample_values(wrapped, target_len));
}

double frame_velocity(const PoseSequence& seq, std::size_t frame_index) {
  if (seq.frames() < 2 || frame_index >= seq.frames() - 1)
    throw InvalidInputError("frame_velocity index " + std::to_string(frame_index) + " out of range for " +
                            std::to_string(seq.frames()) + " frames");
  const auto a = seq.pose(frame_index);
  const auto b = seq.pose(frame_index + 1);
  return (b - a).rowwise().norm().mean();
}

double wrap_angle(double radians) {
  constexpr double kPi = std::numbers::pi;
  if (radians > -kPi && radians <= kPi) return radians;
  double r = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace signstitch
