#pragma once

#include <filesystem>
#include <vector>

#include "sama/losses.hpp"
#include "sama/model.hpp"

namespace sama {

struct TrainOptions {
    int steps = 2000;
    int batch = 8;
    double lr = 1e-4;
    double text_dropout = 0.1;
    double scene_dropout = 0.1;
    int stride = 20;           // keyframe stride for the adaptation stages
    double prior_ratio = 0.5;  // stage 2: fraction of prior-preservation batches
    double grad_clip = 0.0;    // 0 disables clipping
    double lambda_joints = 1.0;
    double lambda_vel = 100.0;
    int log_every = 25;
    int threads = 1;           // batch-parallel gradients, reduced in item order
    uint64_t seed = 1;
};

struct TrainLogRow {
    int step = 0;
    double total = 0.0, t2m = 0.0, joints = 0.0, vel = 0.0;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    void save_csv(const std::filesystem::path& path) const;
    static TrainLog load_csv(const std::filesystem::path& path);
    // moving average of the total loss around a step (window before it)
    double moving_avg(int step, int window = 50) const;
};

struct ScenePair {
    MotionSequence motion;
    SceneSpec scene;
    VoxelGrid grid;  // voxel crop centered at the clip's initial root
};

NormStats compute_norm_stats(const std::vector<MotionSequence>& data);

// Stage 0: label-conditioned pre-training of the backbone (+ null text
// embedding) with 10% label dropout and the full loss set.
void train_stage0(ModelState& state, const std::vector<MotionSequence>& data,
                  const TrainOptions& opt, const Skeleton& skel, TrainLog* log = nullptr);

// Stage 1: keyframe-modulation adaptation. Requires the backbone (and
// nulls) to be frozen; trains only the cakey group, always with the null
// text embedding and masks of the configured stride.
void train_stage1(ModelState& state, const std::vector<MotionSequence>& data,
                  const TrainOptions& opt, const Skeleton& skel, TrainLog* log = nullptr);

// Stage 2: scene conditioning. Requires backbone + cakey frozen; trains the
// scene group and the null scene embedding, alternating scene-inbetweening
// batches with prior-preservation batches.
void train_stage2(ModelState& state, const std::vector<ScenePair>& scene_data,
                  const std::vector<MotionSequence>& prior_data, const TrainOptions& opt,
                  const Skeleton& skel, TrainLog* log = nullptr);

}  // namespace sama
