#pragma once

#include "sama/model.hpp"

namespace sama {

struct GuidanceWeights {
    double w_t = 2.5;  // text scale
    double w_s = 0.0;  // scene scale
};

// Inputs shared by every denoiser call of one sampling run. Scene tokens are
// encoded once and reused across timesteps.
struct SamplingContext {
    std::optional<int> label;
    const KeyframeMask* mask = nullptr;   // nullptr => all-zero mask
    const Mat* keyvals_norm = nullptr;
    const Mat* scene_tokens = nullptr;    // P x vit_dim, from vit_encode
    int length = 0;                       // frames to generate (= valid length)
};

struct GuidedParts {
    Mat base;   // D(null_text, null_scene)
    Mat text;   // D(label, null_scene); empty if unused
    Mat scene;  // D(null_text, scene);  empty if unused
};

// Eq-style dual guidance: base + w_t (text - base) + w_s (scene - base),
// with exact short-circuits for the degenerate weights. At most three
// denoiser evaluations; the base prediction is shared between both
// guidance terms. call_count, when given, receives the number of denoiser
// evaluations made.
Mat guided_x0(const ModelState& state, const Mat& x_t, int t, const SamplingContext& ctx,
              const GuidanceWeights& w, GuidedParts* parts = nullptr,
              int* call_count = nullptr);

struct SampleStats {
    long denoiser_calls = 0;
    int steps = 0;
};

// DDPM ancestral sampling with the posterior variance; returns the
// de-normalized motion. Deterministic given the rng seed.
MotionSequence ddpm_sample(const ModelState& state, const SamplingContext& ctx,
                           const GuidanceWeights& w, Rng& rng, SampleStats* stats = nullptr);

// Inbetweening: conditions the keyframe-modulation path on (mask, values in
// raw motion space); no frames are overwritten in x-space.
MotionSequence inbetween_sample(const ModelState& state, const Mat& keyvals_raw,
                                const KeyframeMask& mask, const GuidanceWeights& w,
                                std::optional<int> label, const Mat* scene_tokens, Rng& rng,
                                SampleStats* stats = nullptr);

// Imputation baseline on the bare backbone: after every step the keyframe
// rows of the current sample are replaced with forward-noised ground truth
// at the matching timestep.
MotionSequence impute_sample(const ModelState& state, const Mat& keyvals_raw,
                             const KeyframeMask& mask, Rng& rng, SampleStats* stats = nullptr);

}  // namespace sama
