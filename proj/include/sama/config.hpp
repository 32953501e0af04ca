#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sama/common.hpp"
#include "sama/model.hpp"
#include "sama/training.hpp"

namespace sama {

// One file describes an entire experiment. Every field has a default; a
// config file overlays the defaults and the canonical serialization is
// hashed into every artifact.
struct ExperimentConfig {
    uint64_t seed = 7;
    std::string out_dir = "runs/default";
    int threads = 2;

    // data generation
    int fps = 20;
    int min_frames = 40;
    int max_frames = 196;
    int train_clips = 512;
    int heldout_clips = 200;
    int scene_pairs = 384;
    int heldout_scene_pairs = 120;
    int classifier_clips_per_label = 100;
    int labels = kNumLabels;
    double scene_dense_fraction = 0.7;  // share of dense scenes in scene-motion pairs

    // scenes
    double bounds_half = 3.0;
    int metrics_sdf_dims = 96;
    int generator_sdf_dims = 64;

    // model
    int latent_dim = 128;
    int blocks = 4;
    int heads = 4;
    int ffn_dim = 512;
    int cakey_hidden = 128;
    int vit_dim = 128;
    int vit_layers = 4;
    int vit_heads = 4;
    int patch_size = 6;
    int vol_dims = 24;
    int timesteps = 100;

    // training
    int stage0_steps = 3000;
    int stage1_steps = 2500;
    int stage2_steps = 3000;
    int batch = 8;
    double lr = 1e-4;
    double text_dropout = 0.1;
    double scene_dropout = 0.1;
    int stride_stage1 = 20;
    int stride_stage2 = 20;
    double prior_ratio = 0.5;
    double grad_clip = 1.0;
    int log_every = 25;

    // ablation switches
    bool ablate_sparse = false;
    bool ablate_adaptive = false;
    bool ablate_time_emb = false;
    bool ablate_prior = false;

    // evaluation
    int evalset_count = 300;
    std::string eval_difficulty = "dense";
    int eval_scenes = 24;
    double evalset_grid_step = 0.2;
    double evalset_min_sdf = 0.3;
    double evalset_keep_frac = 0.1;
    std::vector<double> sweep{0.0, 0.5, 1.0, 2.0};
    double w_t = 2.5;

    std::vector<std::string> stages{"gen-data", "pretrain",      "adapt-stage1",
                                    "adapt-stage2", "build-evalset", "evaluate"};

    std::string to_json() const;                       // canonical (sorted keys)
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    uint64_t hash() const { return fnv1a_str(to_json()); }

    ModelConfig model_config() const;
    TrainOptions train_options(int stage) const;
};

// Cross-field checks; empty result means the config is valid.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);
void require_valid(const ExperimentConfig& cfg);

}  // namespace sama
