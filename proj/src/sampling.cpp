#include "sama/sampling.hpp"

namespace sama {

namespace {

Condition make_condition(const SamplingContext& ctx, bool with_label, bool with_scene) {
    Condition c;
    if (with_label) c.label = ctx.label;
    c.mask = ctx.mask;
    c.keyvals_norm = ctx.keyvals_norm;
    if (with_scene) c.scene_tokens = ctx.scene_tokens;
    c.valid_length = ctx.length;
    return c;
}

}  // namespace

Mat guided_x0(const ModelState& state, const Mat& x_t, int t, const SamplingContext& ctx,
              const GuidanceWeights& w, GuidedParts* parts, int* call_count) {
    const bool want_text = ctx.label.has_value() && w.w_t != 0.0;
    const bool want_scene = ctx.scene_tokens != nullptr && w.w_s != 0.0;
    int calls = 0;

    Mat base, text, scene;
    auto eval = [&](bool lbl, bool scn) {
        ++calls;
        return denoise_predict(state, x_t, t, make_condition(ctx, lbl, scn));
    };

    Mat out;
    if (!want_text && !want_scene) {
        out = base = eval(false, false);
    } else if (want_text && !want_scene && w.w_t == 1.0) {
        out = text = eval(true, false);
    } else if (want_scene && !want_text && w.w_s == 1.0) {
        out = scene = eval(false, true);
    } else {
        base = eval(false, false);
        out = base;
        if (want_text) {
            text = eval(true, false);
            out = out + w.w_t * (text - base);
        }
        if (want_scene) {
            scene = eval(false, true);
            out = out + w.w_s * (scene - base);
        }
    }
    if (parts) {
        parts->base = base;
        parts->text = text;
        parts->scene = scene;
    }
    if (call_count) *call_count = calls;
    return out;
}

namespace {

MotionSequence run_ddpm(const ModelState& state, const SamplingContext& ctx,
                        const GuidanceWeights& w, Rng& rng, SampleStats* stats,
                        const Mat* impute_raw, const KeyframeMask* impute_mask) {
    if (state.norm.empty()) throw ConfigError("sampling requires a trained (normalized) model");
    const NoiseSchedule& sched = state.schedule;
    const int N = ctx.length;
    const int D = state.cfg.pose_dim;
    if (N < 1) throw InvalidInputError("sampling: length must be >= 1");

    Mat impute_norm;
    if (impute_raw) impute_norm = state.norm.normalize(*impute_raw, N);

    Mat x = rng.normal_mat(N, D);
    long calls = 0;
    for (int t = sched.timesteps; t >= 1; --t) {
        int c = 0;
        Mat x0 = guided_x0(state, x, t, ctx, w, nullptr, &c);
        calls += c;
        auto post = sched.posterior(t);
        Mat mean = post.coef_x0 * x0 + post.coef_xt * x;
        if (t > 1)
            x = mean + post.sigma * rng.normal_mat(N, D);
        else
            x = mean;
        if (impute_mask) {
            // overwrite keyframe rows with noised ground truth at t-1
            Rng noise_rng = rng.derive(0x1a2b, static_cast<uint64_t>(t));
            Mat noised = forward_noise(impute_norm, N, t - 1, sched, noise_rng);
            for (int i = 0; i < N; ++i)
                if (impute_mask->bits[i]) x.row(i) = noised.row(i);
        }
    }
    if (stats) {
        stats->denoiser_calls = calls;
        stats->steps = sched.timesteps;
    }

    MotionSequence seq;
    seq.frames = state.norm.denormalize(x, N);
    seq.valid_length = N;
    seq.label = ctx.label.value_or(-1);
    return seq;
}

}  // namespace

MotionSequence ddpm_sample(const ModelState& state, const SamplingContext& ctx,
                           const GuidanceWeights& w, Rng& rng, SampleStats* stats) {
    return run_ddpm(state, ctx, w, rng, stats, nullptr, nullptr);
}

MotionSequence inbetween_sample(const ModelState& state, const Mat& keyvals_raw,
                                const KeyframeMask& mask, const GuidanceWeights& w,
                                std::optional<int> label, const Mat* scene_tokens, Rng& rng,
                                SampleStats* stats) {
    if (!state.has_cakey())
        throw ConfigError("inbetween_sample: model has no keyframe-modulation layers");
    if (mask.count() < 2)
        throw InvalidInputError("inbetween_sample: need at least 2 keyframes");
    if (keyvals_raw.rows() != mask.size())
        throw InvalidInputError("inbetween_sample: keyframe values do not match mask length");
    Mat keyvals_norm = state.norm.normalize(keyvals_raw, mask.size());
    SamplingContext ctx;
    ctx.label = label;
    ctx.mask = &mask;
    ctx.keyvals_norm = &keyvals_norm;
    ctx.scene_tokens = scene_tokens;
    ctx.length = mask.size();
    return run_ddpm(state, ctx, w, rng, stats, nullptr, nullptr);
}

MotionSequence impute_sample(const ModelState& state, const Mat& keyvals_raw,
                             const KeyframeMask& mask, Rng& rng, SampleStats* stats) {
    if (keyvals_raw.rows() != mask.size())
        throw InvalidInputError("impute_sample: keyframe values do not match mask length");
    SamplingContext ctx;
    ctx.length = mask.size();
    return run_ddpm(state, ctx, GuidanceWeights{0.0, 0.0}, rng, stats, &keyvals_raw, &mask);
}

}  // namespace sama
