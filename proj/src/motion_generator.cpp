#include "sama/motion_generator.hpp"

#include <cmath>

namespace sama {

namespace {

constexpr int kHip = 3;   // limb_upper joint index in the default skeleton
constexpr int kFoot = 4;  // limb_lower (tip is the foot)

Eigen::Matrix3d min_rotation(const Vec3& a, const Vec3& b) {
    // Rodrigues rotation taking unit a to unit b
    Vec3 v = a.cross(b);
    double c = a.dot(b);
    double s2 = v.squaredNorm();
    if (s2 < 1e-16) {
        if (c > 0) return Eigen::Matrix3d::Identity();
        // opposite vectors: rotate pi about any perpendicular axis
        Vec3 axis = std::abs(a[0]) < 0.9 ? a.cross(Vec3(1, 0, 0)).normalized()
                                         : a.cross(Vec3(0, 1, 0)).normalized();
        return Eigen::AngleAxisd(kPi, axis).toRotationMatrix();
    }
    Eigen::Matrix3d vx;
    vx << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
    return Eigen::Matrix3d::Identity() + vx + vx * vx * ((1 - c) / s2);
}

// Euler angles for R = Rz(rz) * Ry(ry) * Rx(rx)
Vec3 euler_zyx_from(const Eigen::Matrix3d& R) {
    double ry = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
    double rx = std::atan2(R(2, 1), R(2, 2));
    double rz = std::atan2(R(1, 0), R(0, 0));
    return Vec3(rx, ry, rz);
}

Eigen::AngleAxisd about(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis); }

struct RootPath {
    std::vector<double> x, z, yaw;
};

int label_kind(int label) {
    switch (static_cast<ActionLabel>(label)) {
        case ActionLabel::Idle:
        case ActionLabel::Wave: return 0;  // stationary
        case ActionLabel::WalkForward:
        case ActionLabel::TurnLeft:
        case ActionLabel::TurnRight:
        case ActionLabel::Circle: return 1;  // locomotion
    }
    throw InvalidInputError("unknown label id " + std::to_string(label));
}

RootPath plan_root_path(int label, int length, double yaw0, const GaitParams& gp,
                        const SignedDistanceField* sdf, double root_h, double x0, double z0) {
    RootPath path;
    path.x.resize(length);
    path.z.resize(length);
    path.yaw.resize(length);
    double x = x0, z = z0, yaw = yaw0;
    const bool loco = label_kind(label) == 1;
    double nominal_turn = 0.0;
    if (label == static_cast<int>(ActionLabel::TurnLeft)) nominal_turn = gp.turn_rate;
    if (label == static_cast<int>(ActionLabel::TurnRight)) nominal_turn = -gp.turn_rate;
    if (label == static_cast<int>(ActionLabel::Circle)) nominal_turn = gp.circle_rate;

    auto probe = [&](double px, double pz) {
        if (!sdf) return 1e9;
        return sdf_query(*sdf, Vec3(px, root_h, pz));
    };
    auto ray_clear = [&](double heading) {
        double worst = 1e9;
        for (double s : {0.35, 0.7}) {
            worst = std::min(worst,
                             probe(x + std::cos(heading) * s, z + std::sin(heading) * s));
        }
        return worst;
    };

    for (int i = 0; i < length; ++i) {
        path.x[i] = x;
        path.z[i] = z;
        path.yaw[i] = yaw;
        if (!loco || i == length - 1) continue;

        yaw += nominal_turn;
        double speed = gp.speed;
        if (sdf && ray_clear(yaw) < gp.clearance) {
            // steer toward the clearer side, widening the deflection until a
            // heading with enough clearance appears
            double left30 = ray_clear(yaw + kPi / 6.0);
            double right30 = ray_clear(yaw - kPi / 6.0);
            double sign = left30 >= right30 ? 1.0 : -1.0;
            bool found = false;
            for (double step = kPi / 18.0; step <= 2.0 * kPi / 3.0 + 1e-9; step += kPi / 18.0) {
                for (double sgn : {sign, -sign}) {
                    double cand = yaw + sgn * step;
                    if (ray_clear(cand) >= gp.clearance) {
                        yaw = cand;
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (!found) speed = 0.0;  // blocked: stand still this frame
        }
        // never step below the hard clearance floor
        if (sdf && speed > 0.0) {
            double nx = x + std::cos(yaw) * speed, nz = z + std::sin(yaw) * speed;
            if (probe(nx, nz) < gp.min_clearance + 0.05) speed = 0.0;
        }
        x += std::cos(yaw) * speed;
        z += std::sin(yaw) * speed;
    }
    return path;
}

}  // namespace

void solve_limb_ik(const Skeleton& skel, Vec& pose, const Vec3& foot_target) {
    const double L1 = skel.joint(kHip).length;
    const double L2 = skel.joint(kFoot).length;
    Vec3 hip(pose[0], pose[3], pose[1]);
    double yaw = pose[2];
    Vec3 t = rot_y(-yaw) * (foot_target - hip);
    double r = t.norm();
    r = std::clamp(r, std::abs(L1 - L2) + 1e-6, L1 + L2 - 1e-6);
    Vec3 u = t.normalized();

    // knee bends toward local +x (the facing direction)
    Vec3 bend(1, 0, 0);
    Vec3 n = u.cross(bend);
    if (n.squaredNorm() < 1e-12) n = Vec3(0, 0, 1);
    n.normalize();
    double cos_alpha = std::clamp((L1 * L1 + r * r - L2 * L2) / (2 * L1 * r), -1.0, 1.0);
    double alpha = std::acos(cos_alpha);
    Vec3 d1 = about(n, alpha) * u;
    Vec3 knee = L1 * d1;
    Vec3 d2 = (t.normalized() * r - knee) / L2;
    d2.normalize();

    Vec3 rest = skel.joint(kHip).rest_dir;
    Eigen::Matrix3d R1 = min_rotation(rest, d1);
    Eigen::Matrix3d R2 = R1.transpose() * min_rotation(skel.joint(kFoot).rest_dir, d2);
    Vec3 e1 = euler_zyx_from(R1);
    Vec3 e2 = euler_zyx_from(R2);
    int c1 = Skeleton::angle_channel(kHip), c2 = Skeleton::angle_channel(kFoot);
    for (int a = 0; a < 3; ++a) {
        pose[c1 + a] = e1[a];
        pose[c2 + a] = e2[a];
    }
}

SignedDistanceField scene_sdf(const SceneSpec& scene, int dims) {
    return compute_sdf(voxelize_centered(scene, dims, scene.bounds_center));
}

namespace {

MotionSequence generate_impl(const Skeleton& skel, const SceneSpec* scene,
                             const SignedDistanceField* sdf, int label, int length, int fps,
                             Rng& rng) {
    if (label < 0 || label >= kNumLabels)
        throw InvalidInputError("generate_motion: unknown label id " + std::to_string(label));
    if (length < 40) throw InvalidInputError("generate_motion: length must be >= 40");
    if (skel.joint_count() != 5)
        throw ConfigError("generator requires the default five-joint skeleton");

    const GaitParams gp;
    const double h0 = skel.root_height_standing();
    const bool loco = label_kind(label) == 1;

    if (scene && !scene->boxes.empty()) {
        double start_clear = sdf_query(*sdf, Vec3(scene->bounds_center[0], h0,
                                                  scene->bounds_center[2]));
        double need = loco ? 0.3 : 0.3;
        if (start_clear < need)
            throw GenerationError("no feasible start position (clearance " +
                                  std::to_string(start_clear) + " m)");
    }

    // rng draws in a fixed order so the empty-scene path matches
    // generate_motion exactly
    double yaw0 = rng.uniform(-kPi, kPi);
    double wave_freq = rng.uniform(1.0, 2.0);
    double wave_phase = rng.uniform(0.0, 2 * kPi);
    Vec sway_amp(6), sway_freq(6), sway_phase(6);
    for (int c = 0; c < 6; ++c) {
        sway_amp[c] = rng.uniform(0.02, 0.05);
        sway_freq[c] = rng.uniform(0.3, 1.0);
        sway_phase[c] = rng.uniform(0.0, 2 * kPi);
    }

    double x0 = scene ? scene->bounds_center[0] : 0.0;
    double z0 = scene ? scene->bounds_center[2] : 0.0;
    RootPath path = plan_root_path(label, length, yaw0, gp,
                                   (scene && !scene->boxes.empty()) ? sdf : nullptr, h0, x0, z0);

    // foot plants: one per gait cycle, taken from the planned path
    const int C = gp.cycle;
    int cycles = length / C + 2;
    std::vector<Vec3> plant(cycles + 1);
    for (int k = 0; k <= cycles; ++k) {
        int idx = std::min(k * C + C / 4, length - 1);
        double fx = path.x[idx] + 0.08 * std::cos(path.yaw[idx]);
        double fz = path.z[idx] + 0.08 * std::sin(path.yaw[idx]);
        plant[k] = Vec3(fx, 0.0, fz);
    }

    MotionSequence seq;
    seq.frames = Mat::Zero(length, skel.pose_dim());
    seq.fps = fps;
    seq.label = label;
    seq.valid_length = length;
    seq.contact.assign(length, 0);

    for (int i = 0; i < length; ++i) {
        Vec pose = Vec::Zero(skel.pose_dim());
        pose[0] = path.x[i];
        pose[1] = path.z[i];
        pose[2] = path.yaw[i];
        pose[3] = h0;

        // smooth sway on spine and head channels
        double tsec = static_cast<double>(i) / fps;
        for (int c = 0; c < 6; ++c)
            pose[4 + c] = sway_amp[c] * std::sin(2 * kPi * sway_freq[c] * tsec + sway_phase[c]);

        if (label == static_cast<int>(ActionLabel::Wave)) {
            // limb raised horizontally, tip oscillating at 1-2 Hz
            int c1 = Skeleton::angle_channel(kHip), c2 = Skeleton::angle_channel(kFoot);
            pose[c1 + 2] = kPi / 2.0;
            pose[c2 + 2] = 0.6 * std::sin(2 * kPi * wave_freq * tsec + wave_phase);
            seq.contact[i] = 0;
        } else if (!loco) {
            // idle: foot planted just ahead of the root
            Vec3 target = plant[0];
            solve_limb_ik(skel, pose, target);
            seq.contact[i] = 1;
        } else {
            int k = i / C;
            int ph = i % C;
            if (ph < C / 2) {
                solve_limb_ik(skel, pose, plant[k]);
                seq.contact[i] = 1;
            } else {
                double u = static_cast<double>(ph - C / 2) / (C / 2);
                double su = u * u * (3 - 2 * u);  // smoothstep: soft touchdown
                Vec3 target = (1 - su) * plant[k] + su * plant[k + 1];
                target[1] = gp.swing_lift * std::sin(kPi * u) * std::sin(kPi * u);
                solve_limb_ik(skel, pose, target);
                seq.contact[i] = 0;
            }
        }
        seq.frames.row(i) = pose.transpose();
    }
    return seq;
}

}  // namespace

MotionSequence generate_motion(const Skeleton& skel, int label, int length, int fps, Rng& rng) {
    return generate_impl(skel, nullptr, nullptr, label, length, fps, rng);
}

MotionSequence generate_scene_aware_motion(const Skeleton& skel, const SceneSpec& scene,
                                           const SignedDistanceField* sdf, int label, int length,
                                           int fps, Rng& rng) {
    SignedDistanceField local;
    if (!sdf && !scene.boxes.empty()) {
        local = scene_sdf(scene);
        sdf = &local;
    }
    return generate_impl(skel, &scene, sdf, label, length, fps, rng);
}

}  // namespace sama
