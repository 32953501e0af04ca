#include "sama/config.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sama/io.hpp"

namespace sama {

using nlohmann::json;

namespace {

template <typename T>
void overlay(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

json to_json_obj(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    j["data"] = {{"fps", c.fps},
                 {"min_frames", c.min_frames},
                 {"max_frames", c.max_frames},
                 {"train_clips", c.train_clips},
                 {"heldout_clips", c.heldout_clips},
                 {"scene_pairs", c.scene_pairs},
                 {"heldout_scene_pairs", c.heldout_scene_pairs},
                 {"classifier_clips_per_label", c.classifier_clips_per_label},
                 {"labels", c.labels},
                 {"scene_dense_fraction", c.scene_dense_fraction}};
    j["scene"] = {{"bounds_half", c.bounds_half},
                  {"metrics_sdf_dims", c.metrics_sdf_dims},
                  {"generator_sdf_dims", c.generator_sdf_dims}};
    j["model"] = {{"latent_dim", c.latent_dim}, {"blocks", c.blocks},
                  {"heads", c.heads},           {"ffn_dim", c.ffn_dim},
                  {"cakey_hidden", c.cakey_hidden}, {"vit_dim", c.vit_dim},
                  {"vit_layers", c.vit_layers}, {"vit_heads", c.vit_heads},
                  {"patch_size", c.patch_size}, {"vol_dims", c.vol_dims},
                  {"timesteps", c.timesteps}};
    j["train"] = {{"stage0_steps", c.stage0_steps},
                  {"stage1_steps", c.stage1_steps},
                  {"stage2_steps", c.stage2_steps},
                  {"batch", c.batch},
                  {"lr", c.lr},
                  {"text_dropout", c.text_dropout},
                  {"scene_dropout", c.scene_dropout},
                  {"stride_stage1", c.stride_stage1},
                  {"stride_stage2", c.stride_stage2},
                  {"prior_ratio", c.prior_ratio},
                  {"grad_clip", c.grad_clip},
                  {"log_every", c.log_every}};
    j["ablate"] = {{"sparse", c.ablate_sparse},
                   {"adaptive", c.ablate_adaptive},
                   {"time_emb", c.ablate_time_emb},
                   {"prior", c.ablate_prior}};
    j["eval"] = {{"evalset_count", c.evalset_count},
                 {"eval_difficulty", c.eval_difficulty},
                 {"eval_scenes", c.eval_scenes},
                 {"grid_step", c.evalset_grid_step},
                 {"min_sdf", c.evalset_min_sdf},
                 {"keep_frac", c.evalset_keep_frac},
                 {"sweep", c.sweep},
                 {"w_t", c.w_t}};
    j["stages"] = c.stages;
    return j;
}

}  // namespace

std::string ExperimentConfig::to_json() const { return to_json_obj(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        overlay(j, "seed", c.seed);
        overlay(j, "out_dir", c.out_dir);
        overlay(j, "threads", c.threads);
        if (j.contains("data")) {
            const json& d = j["data"];
            overlay(d, "fps", c.fps);
            overlay(d, "min_frames", c.min_frames);
            overlay(d, "max_frames", c.max_frames);
            overlay(d, "train_clips", c.train_clips);
            overlay(d, "heldout_clips", c.heldout_clips);
            overlay(d, "scene_pairs", c.scene_pairs);
            overlay(d, "heldout_scene_pairs", c.heldout_scene_pairs);
            overlay(d, "classifier_clips_per_label", c.classifier_clips_per_label);
            overlay(d, "labels", c.labels);
            overlay(d, "scene_dense_fraction", c.scene_dense_fraction);
        }
        if (j.contains("scene")) {
            const json& s = j["scene"];
            overlay(s, "bounds_half", c.bounds_half);
            overlay(s, "metrics_sdf_dims", c.metrics_sdf_dims);
            overlay(s, "generator_sdf_dims", c.generator_sdf_dims);
        }
        if (j.contains("model")) {
            const json& m = j["model"];
            overlay(m, "latent_dim", c.latent_dim);
            overlay(m, "blocks", c.blocks);
            overlay(m, "heads", c.heads);
            overlay(m, "ffn_dim", c.ffn_dim);
            overlay(m, "cakey_hidden", c.cakey_hidden);
            overlay(m, "vit_dim", c.vit_dim);
            overlay(m, "vit_layers", c.vit_layers);
            overlay(m, "vit_heads", c.vit_heads);
            overlay(m, "patch_size", c.patch_size);
            overlay(m, "vol_dims", c.vol_dims);
            overlay(m, "timesteps", c.timesteps);
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            overlay(t, "stage0_steps", c.stage0_steps);
            overlay(t, "stage1_steps", c.stage1_steps);
            overlay(t, "stage2_steps", c.stage2_steps);
            overlay(t, "batch", c.batch);
            overlay(t, "lr", c.lr);
            overlay(t, "text_dropout", c.text_dropout);
            overlay(t, "scene_dropout", c.scene_dropout);
            overlay(t, "stride_stage1", c.stride_stage1);
            overlay(t, "stride_stage2", c.stride_stage2);
            overlay(t, "prior_ratio", c.prior_ratio);
            overlay(t, "grad_clip", c.grad_clip);
            overlay(t, "log_every", c.log_every);
        }
        if (j.contains("ablate")) {
            const json& a = j["ablate"];
            overlay(a, "sparse", c.ablate_sparse);
            overlay(a, "adaptive", c.ablate_adaptive);
            overlay(a, "time_emb", c.ablate_time_emb);
            overlay(a, "prior", c.ablate_prior);
        }
        if (j.contains("eval")) {
            const json& e = j["eval"];
            overlay(e, "evalset_count", c.evalset_count);
            overlay(e, "eval_difficulty", c.eval_difficulty);
            overlay(e, "eval_scenes", c.eval_scenes);
            overlay(e, "grid_step", c.evalset_grid_step);
            overlay(e, "min_sdf", c.evalset_min_sdf);
            overlay(e, "keep_frac", c.evalset_keep_frac);
            overlay(e, "sweep", c.sweep);
            overlay(e, "w_t", c.w_t);
        }
        overlay(j, "stages", c.stages);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return from_json(read_text_file(path));
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    write_text_file(path, to_json() + "\n");
}

ModelConfig ExperimentConfig::model_config() const {
    ModelConfig m;
    m.pose_dim = 4 + 3 * (5 - 1);
    m.latent_dim = latent_dim;
    m.blocks = blocks;
    m.heads = heads;
    m.ffn_dim = ffn_dim;
    m.n_labels = labels;
    m.cakey_hidden = cakey_hidden;
    m.cakey_flags.sparse = !ablate_sparse;
    m.cakey_flags.adaptive = !ablate_adaptive;
    m.cakey_flags.use_time_emb = !ablate_time_emb;
    m.vit_dim = vit_dim;
    m.vit_layers = vit_layers;
    m.vit_heads = vit_heads;
    m.patch_size = patch_size;
    m.vol_dims = Vec3i(vol_dims, vol_dims, vol_dims);
    return m;
}

TrainOptions ExperimentConfig::train_options(int stage) const {
    TrainOptions t;
    t.steps = stage == 0 ? stage0_steps : stage == 1 ? stage1_steps : stage2_steps;
    t.batch = batch;
    t.lr = lr;
    t.text_dropout = text_dropout;
    t.scene_dropout = scene_dropout;
    t.stride = stage == 2 ? stride_stage2 : stride_stage1;
    t.prior_ratio = ablate_prior ? 0.0 : prior_ratio;
    t.grad_clip = stage == 2 ? grad_clip : 0.0;
    t.log_every = log_every;
    t.threads = threads;
    t.seed = Rng::mix(seed, 0x7000 + stage);
    return t;
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> errs;
    auto err = [&](const std::string& m) { errs.push_back(m); };
    if (c.vol_dims % c.patch_size != 0)
        err("model.vol_dims (" + std::to_string(c.vol_dims) +
            ") must be divisible by model.patch_size (" + std::to_string(c.patch_size) + ")");
    if (c.latent_dim % c.heads != 0) err("model.latent_dim must be divisible by model.heads");
    if (c.vit_dim % c.vit_heads != 0) err("model.vit_dim must be divisible by model.vit_heads");
    if (c.stride_stage1 < 1) err("train.stride_stage1 must be >= 1");
    if (c.stride_stage2 < 1) err("train.stride_stage2 must be >= 1");
    if (c.stride_stage1 > c.max_frames)
        err("train.stride_stage1 (" + std::to_string(c.stride_stage1) +
            ") must not exceed data.max_frames (" + std::to_string(c.max_frames) + ")");
    if (c.stride_stage2 > c.max_frames)
        err("train.stride_stage2 (" + std::to_string(c.stride_stage2) +
            ") must not exceed data.max_frames (" + std::to_string(c.max_frames) + ")");
    if (c.labels != kNumLabels)
        err("data.labels (" + std::to_string(c.labels) + ") must match the generator vocabulary (" +
            std::to_string(kNumLabels) + ")");
    if (c.min_frames < 40) err("data.min_frames must be >= 40 (generator contract)");
    if (c.min_frames > c.max_frames) err("data.min_frames must not exceed data.max_frames");
    if (c.timesteps < 1) err("model.timesteps must be >= 1");
    if (c.batch < 1) err("train.batch must be >= 1");
    if (c.prior_ratio < 0.0 || c.prior_ratio > 1.0) err("train.prior_ratio must be in [0,1]");
    if (c.evalset_keep_frac <= 0.0 || c.evalset_keep_frac > 1.0)
        err("eval.keep_frac must be in (0,1]");
    if (c.sweep.empty()) err("eval.sweep must not be empty");
    for (double w : c.sweep)
        if (w < 0.0) err("eval.sweep values must be >= 0");
    if (c.eval_scenes < 1) err("eval.eval_scenes must be >= 1");
    if (c.threads < 1) err("threads must be >= 1");
    const std::vector<std::string> known{"gen-data",      "pretrain", "adapt-stage1",
                                         "adapt-stage2", "build-evalset", "evaluate"};
    for (const auto& s : c.stages)
        if (std::find(known.begin(), known.end(), s) == known.end())
            err("unknown stage '" + s + "'");
    return errs;
}

void require_valid(const ExperimentConfig& cfg) {
    auto errs = validate_config(cfg);
    if (errs.empty()) return;
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& e : errs) os << "\n  - " << e;
    throw ConfigError(os.str());
}

}  // namespace sama
