#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sama/common.hpp"
#include "sama/motion.hpp"
#include "sama/nn/tape.hpp"
#include "sama/rng.hpp"
#include "sama/scene.hpp"
#include "sama/schedule.hpp"

namespace sama {

struct CaKeyFlags {
    bool sparse = true;     // blend by keyframe mask (identity off-keyframe)
    bool adaptive = true;   // feed the current activation to the modulator
    bool use_time_emb = true;
};

struct ModelConfig {
    int pose_dim = 16;    // D
    int latent_dim = 128; // d
    int blocks = 4;
    int heads = 4;
    int ffn_dim = 512;
    int n_labels = kNumLabels;
    int cakey_hidden = 128;
    CaKeyFlags cakey_flags;
    // voxel patch encoder
    int vit_dim = 128;
    int vit_layers = 4;
    int vit_heads = 4;
    int patch_size = 6;
    Vec3i vol_dims{24, 24, 24};

    int patch_count() const {
        return (vol_dims[0] / patch_size) * (vol_dims[1] / patch_size) *
               (vol_dims[2] / patch_size);
    }
    void validate() const;
};

struct AttnParams {
    Mat wq, bq, wk, bk, wv, bv, wo, bo;
};

struct BlockParams {
    Mat ln1_g, ln1_b;
    AttnParams attn;
    Mat ln2_g, ln2_b;
    Mat ff_w1, ff_b1, ff_w2, ff_b2;
};

struct BackboneParams {
    Mat label_embed;                      // K x d
    Mat time_w1, time_b1, time_w2, time_b2;
    Mat in_w, in_b;                       // D -> d
    Mat out_w, out_b;                     // d -> D
    std::vector<BlockParams> blocks;
};

// Modulator pair (f, h) producing scale offset and shift per frame; output
// layers start at zero so gamma == 1, beta == 0 (identity modulation).
struct CaKeyLayerParams {
    Mat key_w, key_b;                     // D -> d projection of keyframe values
    Mat f_w1, f_b1, f_w2, f_b2;
    Mat h_w1, h_b1, h_w2, h_b2;
};

struct CaKeyParams {
    std::vector<CaKeyLayerParams> layers;  // one per backbone block
};

struct VitParams {
    Mat patch_w, patch_b;                 // patch_size^3 -> vit_dim
    Mat pos;                              // P x vit_dim learned positions
    std::vector<BlockParams> blocks;
    Mat out_ln_g, out_ln_b;
};

struct CrossAttnParams {
    Mat lnq_g, lnq_b;                     // over latents (d)
    Mat lnkv_g, lnkv_b;                   // over patch tokens (vit_dim)
    Mat wq, bq;                           // d -> d
    Mat wk, bk, wv, bv;                   // vit_dim -> d
    Mat wo, bo;                           // d -> d, wo zero-init
};

struct SceneCondParams {
    VitParams vit;
    std::vector<CrossAttnParams> cross;   // one per backbone block
};

struct FreezeFlags {
    bool backbone = false;
    bool cakey = false;
    bool scenecond = false;
    bool null_text = false;
    bool null_scene = false;
};

// Per-channel normalization of the motion representation, computed from the
// pre-training dataset.
struct NormStats {
    Vec mean, stddev;

    Mat normalize(const Mat& raw, int valid_len) const;
    Mat denormalize(const Mat& normed, int valid_len) const;
    bool empty() const { return mean.size() == 0; }
};

struct ModelState {
    ModelConfig cfg;
    NoiseSchedule schedule;
    NormStats norm;
    BackboneParams backbone;
    Mat null_text;   // 1 x d
    std::optional<CaKeyParams> cakey;
    std::optional<SceneCondParams> scenecond;
    Mat null_scene;  // 1 x vit_dim; size 0 until scene layers exist
    FreezeFlags freeze;
    uint64_t config_hash = 0;
    uint64_t train_seed = 0;
    int64_t train_step = 0;

    bool has_cakey() const { return cakey.has_value(); }
    bool has_scene() const { return scenecond.has_value(); }
};

ModelState init_backbone(const ModelConfig& cfg, const NoiseSchedule& sched, Rng& rng);
void add_cakey_layers(ModelState& state, Rng& rng);
void add_scene_layers(ModelState& state, Rng& rng);

// Named parameter enumeration in a fixed order; group is one of
// "backbone", "cakey", "scenecond", "nulls".
std::vector<std::pair<std::string, Mat*>> collect_params(ModelState& state,
                                                         const std::string& group);
std::vector<std::string> param_groups(const ModelState& state);
uint64_t params_checksum(ModelState& state, const std::string& group);
int64_t param_count(ModelState& state);

// Conditioning bundle for one denoiser call. Exactly one of label /
// null-text is in effect (nullopt means the null embedding), and at most
// one of scene_grid / scene_tokens (neither means the null scene when the
// scene layers exist).
struct Condition {
    std::optional<int> label;
    const KeyframeMask* mask = nullptr;   // nullptr behaves as all-zero
    const Mat* keyvals_norm = nullptr;    // N x D, read only at mask==1 rows
    const VoxelGrid* scene_grid = nullptr;
    const Mat* scene_tokens = nullptr;    // cached vit output (P x vit_dim)
    int valid_length = 0;
};

// Tracks which parameter groups are bound as trainable leaves on a tape and
// hands out constant leaves for everything else.
class ParamBinder {
public:
    explicit ParamBinder(nn::Tape& tape) : tape_(tape) {}

    void bind_trainable(const std::vector<std::pair<std::string, Mat*>>& params);
    nn::Var operator()(const Mat& m);

    const std::vector<std::pair<Mat*, nn::Var>>& trainable() const { return trainable_; }
    std::vector<Mat> take_grads() const;

private:
    nn::Tape& tape_;
    std::unordered_map<const Mat*, nn::Var> bound_;
    std::vector<std::pair<Mat*, nn::Var>> trainable_;
};

// Full denoiser forward on a tape (training path). Returns x0-prediction in
// normalized space, N x D.
nn::Var model_forward(nn::Tape& tape, ParamBinder& P, const ModelState& state, const Mat& x_t,
                      int t, const Condition& cond);

// Inference conveniences (no gradients).
Mat denoise_predict(const ModelState& state, const Mat& x_t, int t, const Condition& cond);
Mat vit_encode(const ModelState& state, const VoxelGrid& grid);

Mat sinusoidal_positions(int count, int dim);
Mat timestep_embedding_table(int t, int dim);

}  // namespace sama
