#pragma once

// Skeleton data model: keypoint layout, the canonical kinematic tree, angle and
// pose sequences, forward kinematics, pose normalisation and resampling.

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signstitch/errors.hpp"

namespace signstitch {

inline constexpr std::size_t kHandKeypoints = 21;
inline constexpr std::size_t kBodyKeypoints = 9;
inline constexpr std::size_t kFaceKeypoints = 10;
inline constexpr std::size_t kKeypointCount = 2 * kHandKeypoints + kBodyKeypoints + kFaceKeypoints;
inline constexpr std::size_t kAngleCount = 104;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One frame of joint angles, radians, one entry per angle slot.
using AngleFrame = Eigen::VectorXd;
/// One frame of keypoint coordinates, one row per keypoint.
using PoseFrame = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

enum class BodyPart { kLeftHand, kRightHand, kBody, kFace };

const char* to_string(BodyPart part);

/// Names, parents and anatomical landmarks of the keypoint set.
///
/// Keypoints are stored in partition order: left hand, right hand, body, face.
/// The parent graph is a tree rooted at a single body keypoint.
struct JointLayout {
  std::vector<std::string> names;
  std::vector<int> parents;  // -1 for the root
  std::vector<BodyPart> parts;
  int neck = -1;
  std::pair<int, int> shoulders{-1, -1};  // (left, right)
  /// Body keypoint below the neck (mid hip). Fixes the roll about the shoulder
  /// axis during normalisation; -1 when unavailable.
  int torso = -1;

  std::size_t size() const { return names.size(); }
  int root() const;
};

/// Kinematic tree with fixed bone lengths and per-joint rotational degrees of
/// freedom. Joint angles are intrinsic rotations applied in x, y, z order about
/// the axes the joint exposes.
class CanonicalSkeleton {
 public:
  struct Joint {
    int keypoint = -1;
    std::string axes;  // strictly increasing subset of "xyz", 1..3 characters
    std::size_t dof() const { return axes.size(); }
  };

  struct AngleSlot {
    int joint = -1;
    char axis = 'x';
  };

  /// Validates structure (tree, positive lengths, unit directions, complete
  /// slot map) but not the 61/104 canonical sizes; see `check_canonical_sizes`.
  CanonicalSkeleton(JointLayout layout, std::vector<double> bone_lengths,
                    std::vector<Vec3> rest_directions, std::vector<Joint> joints,
                    std::vector<AngleSlot> slots, std::string id = "custom");

  const JointLayout& layout() const { return layout_; }
  const std::vector<double>& bone_lengths() const { return bone_lengths_; }
  const std::vector<Vec3>& rest_directions() const { return rest_directions_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<AngleSlot>& slots() const { return slots_; }
  const std::string& id() const { return id_; }

  std::size_t keypoint_count() const { return layout_.size(); }
  std::size_t angle_count() const { return slots_.size(); }
  /// Keypoints ordered parent-before-child.
  const std::vector<int>& traversal_order() const { return order_; }

  /// Throws SchemaError unless the skeleton has 61 keypoints in 21/21/9/10
  /// partitions and exactly 104 angle slots.
  void check_canonical_sizes() const;

  /// Pose with every angle zero: bones along rest directions.
  PoseFrame rest_pose() const;

  /// Writes keypoint_count()*3 coordinates into `out` (row-major xyz).
  void forward(std::span<const double> angles, std::span<double> out) const;

 private:
  JointLayout layout_;
  std::vector<double> bone_lengths_;
  std::vector<Vec3> rest_directions_;
  std::vector<Joint> joints_;
  std::vector<AngleSlot> slots_;
  std::string id_;

  std::vector<int> order_;
  std::vector<int> joint_of_keypoint_;           // -1 when not articulated
  std::vector<std::array<int, 3>> slot_of_axis_;  // per joint, slot per x/y/z or -1
};

/// The built-in 61-keypoint, 104-angle upper-body and hands skeleton.
const CanonicalSkeleton& reference_skeleton();

CanonicalSkeleton load_skeleton(std::istream& in);
CanonicalSkeleton load_skeleton_file(const std::string& path);
void save_skeleton(const CanonicalSkeleton& skel, std::ostream& out);

/// Frames of equal width stored contiguously, frame-major.
class FrameBuffer {
 public:
  FrameBuffer() = default;
  FrameBuffer(std::size_t width, double fps, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t frames() const { return width_ == 0 ? 0 : values_.size() / width_; }
  bool empty() const { return values_.empty(); }
  double fps() const { return fps_; }
  void set_fps(double fps);

  std::span<const double> frame(std::size_t i) const {
    return {values_.data() + i * width_, width_};
  }
  std::span<double> frame(std::size_t i) { return {values_.data() + i * width_, width_}; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool operator==(const FrameBuffer&) const = default;

 protected:
  std::size_t width_ = 0;
  double fps_ = 0.0;
  std::vector<double> values_;
};

/// Joint-angle frames of width `CanonicalSkeleton::angle_count()`.
class AngleSequence : public FrameBuffer {
 public:
  using FrameBuffer::FrameBuffer;
  AngleFrame frame_vector(std::size_t i) const;
};

/// Keypoint frames; width is keypoints*3.
class PoseSequence : public FrameBuffer {
 public:
  PoseSequence() = default;
  PoseSequence(std::size_t keypoints, double fps, std::vector<double> values)
      : FrameBuffer(keypoints * 3, fps, std::move(values)) {}

  std::size_t keypoints() const { return width_ / 3; }
  Eigen::Map<const PoseFrame> pose(std::size_t i) const {
    return {values_.data() + i * width_, static_cast<Eigen::Index>(keypoints()), 3};
  }
  Eigen::Map<PoseFrame> pose(std::size_t i) {
    return {values_.data() + i * width_, static_cast<Eigen::Index>(keypoints()), 3};
  }
  void append(const Eigen::Ref<const PoseFrame>& frame);
  void append(const PoseSequence& other);
};

PoseFrame forward_kinematics(const AngleFrame& angles, const CanonicalSkeleton& skel);
PoseSequence forward_kinematics(const AngleSequence& angles, const CanonicalSkeleton& skel);

/// Moves the neck to the origin and rotates every frame rigidly so the
/// left-to-right shoulder vector lies on +x and the neck-to-torso direction
/// lies in the xy-plane pointing towards -y.
PoseSequence normalize_pose(const PoseSequence& seq, const JointLayout& layout);

/// Linear resampling to `target_len` frames; sample j sits at
/// j*(U-1)/(target_len-1) in input frame time. Endpoints are copied exactly.
PoseSequence resample(const PoseSequence& seq, std::size_t target_len);
/// Angle variant: values are first wrapped to (-pi, pi].
AngleSequence resample(const AngleSequence& seq, std::size_t target_len);

/// Mean keypoint displacement between frames i and i+1.
double frame_velocity(const PoseSequence& seq, std::size_t frame_index);

/// Maps an angle to (-pi, pi].
double wrap_angle(double radians);

}  // namespace signstitch
