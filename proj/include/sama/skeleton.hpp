#pragma once

#include <string>
#include <vector>

#include "sama/common.hpp"

namespace sama {

struct Joint {
    std::string name;
    int parent = -1;       // -1 only for the root
    double length = 0.0;   // bone length from parent to this joint, meters
    Vec3 rest_dir{0, 1, 0};
};

// Kinematic tree. Joint 0 is the root (pelvis); every other joint hangs off
// a parent with a fixed-length bone along rest_dir in the parent frame.
//
// Pose vector layout (D = 4 + 3*(J-1)):
//   [0] root x   [1] root z   [2] root yaw (rad, about +Y)   [3] root height
//   [4 + 3*(j-1) ..] per joint j>=1: local rotation angles (rx, ry, rz),
//   composed as R = Rz(rz) * Ry(ry) * Rx(rx).
class Skeleton {
public:
    Skeleton() = default;
    explicit Skeleton(std::vector<Joint> joints, double root_height_standing);

    // pelvis -> spine -> head plus a two-link limb that hangs from the
    // pelvis and reaches the ground; its tip doubles as the foot for the
    // contact metrics and as the waving arm for the "wave" label.
    static Skeleton default_five_joint();

    int joint_count() const { return static_cast<int>(joints_.size()); }
    int pose_dim() const { return 4 + 3 * (joint_count() - 1); }
    const Joint& joint(int i) const { return joints_[i]; }
    double root_height_standing() const { return root_height_standing_; }

    // leaves whose rest-pose height is minimal (the ground-contact chain)
    const std::vector<int>& foot_joints() const { return foot_joints_; }

    // first angle channel of joint j in the pose vector
    static int angle_channel(int j) { return 4 + 3 * (j - 1); }

private:
    void validate_and_index();

    std::vector<Joint> joints_;
    double root_height_standing_ = 0.0;
    std::vector<int> foot_joints_;
};

// Global joint positions, J x 3 (x, y, z), y up.
Mat forward_kinematics(const Skeleton& skel, const Vec& pose);

// Analytic Jacobian d(joint positions)/d(pose), (3*J) x D, computed by
// forward-mode accumulation through the tree. Row order: joint-major,
// (x, y, z) per joint.
Mat fk_jacobian(const Skeleton& skel, const Vec& pose);

// FK applied per frame; returns N x (3*J), columns joint-major.
Mat fk_sequence(const Skeleton& skel, const Mat& frames);

// out[i] = pos[i+1] - pos[i]; requires N >= 2.
Mat temporal_diff(const Mat& positions);

Eigen::Matrix3d rot_x(double a);
Eigen::Matrix3d rot_y(double a);
Eigen::Matrix3d rot_z(double a);

}  // namespace sama
