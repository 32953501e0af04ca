#pragma once

#include <optional>
#include <vector>

#include "sama/metrics.hpp"
#include "sama/model.hpp"
#include "sama/motion.hpp"
#include "sama/sampling.hpp"
#include "sama/scene.hpp"

namespace sama {

struct EvalPair {
    int scene_id = 0;
    int clip_id = 0;   // reference clip in the motion bank
    int label = 0;
    Vec3 start{0, 0, 0};
    double start_yaw = 0.0;
};

struct EvalSetConfig {
    int count = 300;
    double grid_step = 0.2;    // candidate grid spacing, m
    double min_sdf = 0.3;      // discard starts closer to geometry than this
    double keep_frac = 0.1;    // keep the top fraction by SDF
    double height_frac = 0.8;  // discard root heights below this x standing
};

struct StartCandidate {
    Vec3 pos{0, 0, 0};
};

// Filter + rank: drop candidates whose height is below height_frac x
// standing or whose SDF is below min_sdf, sort the survivors by SDF
// descending (ties by index) and keep ceil(keep_frac * survivors).
std::vector<int> filter_start_candidates(const std::vector<StartCandidate>& candidates,
                                         const SignedDistanceField& sdf, const Skeleton& skel,
                                         const EvalSetConfig& cfg);

// Candidate grid over the scene ground plane at standing height.
std::vector<StartCandidate> grid_candidates(const SceneSpec& scene, const Skeleton& skel,
                                            double step);

// Appendix-style pseudo pairs: grid candidates per scene, SDF filter, top-10%
// rule, then a random bank clip per kept start (skipping labels infeasible at
// that start). Deterministic under the rng seed; throws with the shortfall
// when fewer pairs than `count` survive.
std::vector<EvalPair> build_eval_set(const std::vector<SceneSpec>& scenes,
                                     const std::vector<SignedDistanceField>& sdfs,
                                     const std::vector<MotionSequence>& bank,
                                     const Skeleton& skel, const EvalSetConfig& cfg, Rng& rng);

struct EvalRunConfig {
    std::vector<double> sweep{0.0, 0.5, 1.0, 2.0};
    double w_t = 2.5;
    int length_min = 196;  // per-pair clip length drawn uniformly from this range
    int length_max = 196;
    int threads = 1;
    bool inject_ground_truth = false;  // bypass sampling, evaluate reference clips
};

struct SweepRow {
    double w_s = 0.0;
    double toy_fid = 0.0;
    bool fid_regularized = false;
    double label_accuracy = 0.0;
    double cfr_mean = 0.0, cfr_std = 0.0;
    double mmp_mean = 0.0, mmp_std = 0.0;
    double jcr_mean = 0.0, jcr_std = 0.0;
    double foot_skating = 0.0, skating_ratio = 0.0;
    double mjpe_mean = -1.0;  // < 0 when no reference correspondence exists
};

struct EvalReport {
    std::vector<SweepRow> rows;
    uint64_t seed = 0;
    int pairs = 0;
    double w_t = 2.5;
};

// Samples every pair at every sweep point (same per-pair seed across the
// sweep), computes the metric suite against the scenes' SDFs and aggregates.
EvalReport run_evaluation(const ModelState& state, const std::vector<EvalPair>& pairs,
                          const std::vector<SceneSpec>& scenes,
                          const std::vector<SignedDistanceField>& metric_sdfs,
                          const std::vector<MotionSequence>& bank, const LabelClassifier& clf,
                          const Mat& ref_features, const Skeleton& skel,
                          const EvalRunConfig& cfg, Rng& rng);

}  // namespace sama
