#pragma once

#include "sama/motion.hpp"
#include "sama/scene.hpp"
#include "sama/skeleton.hpp"

namespace sama {

// Synthetic label-conditioned motion. Locomotion labels drive the two-link
// limb with planted-foot inverse kinematics so contact frames have zero
// horizontal foot velocity (the skating metrics rely on this). Deterministic
// under a fixed rng seed; clips start at the origin with a random initial
// heading.
MotionSequence generate_motion(const Skeleton& skel, int label, int length, int fps, Rng& rng);

// Same generator with a greedy tangent-avoidance controller steering
// locomotion around obstacles; the clip starts at the scene's bounds center
// (world frame). With an empty scene centered at the origin the controller
// consumes the same rng draws and degenerates to generate_motion
// bit-for-bit. The sdf may be null, in which case it is computed from the
// scene.
MotionSequence generate_scene_aware_motion(const Skeleton& skel, const SceneSpec& scene,
                                           const SignedDistanceField* sdf, int label, int length,
                                           int fps, Rng& rng);

// Metrics-grade SDF of a scene volume (bounds cube at `dims` resolution).
SignedDistanceField scene_sdf(const SceneSpec& scene, int dims = 64);

// Default locomotion parameters, shared with tests.
struct GaitParams {
    double speed = 0.035;        // m/frame
    int cycle = 16;              // frames per gait cycle
    double turn_rate = 0.025;    // rad/frame for turn labels
    double circle_rate = 0.05;   // rad/frame for the circle label
    double swing_lift = 0.12;    // m
    double clearance = 0.45;     // controller steering clearance, m
    double min_clearance = 0.10; // hard floor the controller never crosses
};

// Two-link limb IK: places the limb chain of `skel` so its tip lands on
// `foot_target` (world frame), writing the two joints' angle channels into
// `pose`. Exposed for tests.
void solve_limb_ik(const Skeleton& skel, Vec& pose, const Vec3& foot_target);

}  // namespace sama
