#include "sama/skeleton.hpp"

#include <algorithm>
#include <sstream>

namespace sama {

Eigen::Matrix3d rot_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, c, -s, 0, s, c;
    return m;
}

Eigen::Matrix3d rot_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << c, 0, s, 0, 1, 0, -s, 0, c;
    return m;
}

Eigen::Matrix3d rot_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << c, -s, 0, s, c, 0, 0, 0, 1;
    return m;
}

namespace {

Eigen::Matrix3d drot_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << 0, 0, 0, 0, -s, -c, 0, c, -s;
    return m;
}

Eigen::Matrix3d drot_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << -s, 0, c, 0, 0, 0, -c, 0, -s;
    return m;
}

Eigen::Matrix3d drot_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << -s, -c, 0, c, -s, 0, 0, 0, 0;
    return m;
}

}  // namespace

Skeleton::Skeleton(std::vector<Joint> joints, double root_height_standing)
    : joints_(std::move(joints)), root_height_standing_(root_height_standing) {
    validate_and_index();
}

void Skeleton::validate_and_index() {
    if (joints_.empty() || joints_[0].parent != -1)
        throw ConfigError("skeleton: joint 0 must be the root (parent -1)");
    for (int i = 1; i < joint_count(); ++i) {
        const Joint& j = joints_[i];
        if (j.parent < 0 || j.parent >= i)
            throw ConfigError("skeleton: parent_index must form a tree rooted at joint 0");
        if (!(j.length > 0.0))
            throw ConfigError("skeleton: bone length of joint " + std::to_string(i) +
                              " must be > 0");
    }
    // leaves at the lowest rest height are the contact chain
    std::vector<bool> has_child(joint_count(), false);
    for (int i = 1; i < joint_count(); ++i) has_child[joints_[i].parent] = true;
    Vec zero_pose = Vec::Zero(pose_dim());
    zero_pose[3] = root_height_standing_;
    Mat pos = forward_kinematics(*this, zero_pose);
    double min_h = pos.col(1).minCoeff();
    foot_joints_.clear();
    for (int i = 0; i < joint_count(); ++i)
        if (!has_child[i] && pos(i, 1) < min_h + 1e-6) foot_joints_.push_back(i);
}

Skeleton Skeleton::default_five_joint() {
    std::vector<Joint> joints;
    joints.push_back({"pelvis", -1, 0.0, Vec3(0, 1, 0)});
    joints.push_back({"spine", 0, 0.30, Vec3(0, 1, 0)});
    joints.push_back({"head", 1, 0.20, Vec3(0, 1, 0)});
    joints.push_back({"limb_upper", 0, 0.52, Vec3(0, -1, 0)});
    joints.push_back({"limb_lower", 3, 0.52, Vec3(0, -1, 0)});
    return Skeleton(std::move(joints), 0.95);
}

Mat forward_kinematics(const Skeleton& skel, const Vec& pose) {
    const int J = skel.joint_count();
    if (pose.size() != skel.pose_dim())
        throw ConfigError("forward_kinematics: pose dim " + std::to_string(pose.size()) +
                          " does not match skeleton dim " + std::to_string(skel.pose_dim()));
    Mat pos(J, 3);
    std::vector<Eigen::Matrix3d> rot(J);
    rot[0] = rot_y(pose[2]);
    pos.row(0) << pose[0], pose[3], pose[1];
    for (int j = 1; j < J; ++j) {
        const Joint& jn = skel.joint(j);
        int c = Skeleton::angle_channel(j);
        Eigen::Matrix3d local = rot_z(pose[c + 2]) * rot_y(pose[c + 1]) * rot_x(pose[c]);
        rot[j] = rot[jn.parent] * local;
        pos.row(j) = pos.row(jn.parent) + (rot[j] * (jn.length * jn.rest_dir)).transpose();
    }
    return pos;
}

Mat fk_jacobian(const Skeleton& skel, const Vec& pose) {
    const int J = skel.joint_count();
    const int D = skel.pose_dim();
    if (pose.size() != D) throw ConfigError("fk_jacobian: pose dim mismatch");

    std::vector<Eigen::Matrix3d> rot(J);
    std::vector<Vec3> pos(J);
    // tangents per channel
    std::vector<std::vector<Eigen::Matrix3d>> drot(J, std::vector<Eigen::Matrix3d>(D));
    std::vector<std::vector<Vec3>> dpos(J, std::vector<Vec3>(D));

    rot[0] = rot_y(pose[2]);
    pos[0] = Vec3(pose[0], pose[3], pose[1]);
    for (int c = 0; c < D; ++c) {
        drot[0][c].setZero();
        dpos[0][c].setZero();
    }
    drot[0][2] = drot_y(pose[2]);
    dpos[0][0] = Vec3(1, 0, 0);
    dpos[0][1] = Vec3(0, 0, 1);
    dpos[0][3] = Vec3(0, 1, 0);

    for (int j = 1; j < J; ++j) {
        const Joint& jn = skel.joint(j);
        int p = jn.parent;
        int c0 = Skeleton::angle_channel(j);
        Eigen::Matrix3d rx = rot_x(pose[c0]), ry = rot_y(pose[c0 + 1]), rz = rot_z(pose[c0 + 2]);
        Eigen::Matrix3d local = rz * ry * rx;
        rot[j] = rot[p] * local;
        Vec3 bone = jn.length * jn.rest_dir;
        pos[j] = pos[p] + rot[j] * bone;
        for (int c = 0; c < D; ++c) {
            Eigen::Matrix3d dlocal = Eigen::Matrix3d::Zero();
            if (c == c0) dlocal = rz * ry * drot_x(pose[c0]);
            if (c == c0 + 1) dlocal = rz * drot_y(pose[c0 + 1]) * rx;
            if (c == c0 + 2) dlocal = drot_z(pose[c0 + 2]) * ry * rx;
            drot[j][c] = drot[p][c] * local + rot[p] * dlocal;
            dpos[j][c] = dpos[p][c] + drot[j][c] * bone;
        }
    }

    Mat jac(3 * J, D);
    for (int j = 0; j < J; ++j)
        for (int c = 0; c < D; ++c)
            for (int a = 0; a < 3; ++a) jac(3 * j + a, c) = dpos[j][c][a];
    return jac;
}

Mat fk_sequence(const Skeleton& skel, const Mat& frames) {
    const int J = skel.joint_count();
    Mat out(frames.rows(), 3 * J);
    for (int i = 0; i < frames.rows(); ++i) {
        Mat pos = forward_kinematics(skel, frames.row(i).transpose());
        for (int j = 0; j < J; ++j) out.block(i, 3 * j, 1, 3) = pos.row(j);
    }
    return out;
}

Mat temporal_diff(const Mat& positions) {
    if (positions.rows() < 2)
        throw InvalidInputError("temporal_diff: need at least 2 frames");
    return positions.bottomRows(positions.rows() - 1) - positions.topRows(positions.rows() - 1);
}

}  // namespace sama
