#include "sama/evalset.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "sama/motion_generator.hpp"

namespace sama {

std::vector<StartCandidate> grid_candidates(const SceneSpec& scene, const Skeleton& skel,
                                            double step) {
    std::vector<StartCandidate> out;
    double margin = 0.3;
    double lo = -scene.bounds_half + margin, hi = scene.bounds_half - margin;
    for (double x = lo; x <= hi + 1e-9; x += step)
        for (double z = lo; z <= hi + 1e-9; z += step)
            out.push_back({Vec3(scene.bounds_center[0] + x, skel.root_height_standing(),
                                scene.bounds_center[2] + z)});
    return out;
}

std::vector<int> filter_start_candidates(const std::vector<StartCandidate>& candidates,
                                         const SignedDistanceField& sdf, const Skeleton& skel,
                                         const EvalSetConfig& cfg) {
    std::vector<std::pair<double, int>> survivors;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
        const StartCandidate& c = candidates[i];
        if (c.pos[1] < cfg.height_frac * skel.root_height_standing()) continue;
        double d = sdf_query(sdf, c.pos);
        if (d < cfg.min_sdf) continue;
        survivors.emplace_back(d, i);
    }
    std::stable_sort(survivors.begin(), survivors.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    size_t keep = static_cast<size_t>(
        std::ceil(cfg.keep_frac * static_cast<double>(survivors.size())));
    keep = std::min(keep, survivors.size());
    std::vector<int> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(survivors[i].second);
    return out;
}

namespace {

bool label_feasible(int label, const Vec3& start, const SignedDistanceField& sdf) {
    bool loco = label == static_cast<int>(ActionLabel::WalkForward) ||
                label == static_cast<int>(ActionLabel::TurnLeft) ||
                label == static_cast<int>(ActionLabel::TurnRight) ||
                label == static_cast<int>(ActionLabel::Circle);
    if (!loco) return sdf_query(sdf, start) >= 0.3;
    for (int k = 0; k < 16; ++k) {
        double heading = 2.0 * kPi * k / 16;
        bool clear = true;
        for (double s : {0.4, 0.8}) {
            Vec3 p = start + s * Vec3(std::cos(heading), 0, std::sin(heading));
            if (sdf_query(sdf, p) < 0.25) {
                clear = false;
                break;
            }
        }
        if (clear) return true;
    }
    return false;
}

}  // namespace

std::vector<EvalPair> build_eval_set(const std::vector<SceneSpec>& scenes,
                                     const std::vector<SignedDistanceField>& sdfs,
                                     const std::vector<MotionSequence>& bank,
                                     const Skeleton& skel, const EvalSetConfig& cfg, Rng& rng) {
    if (scenes.size() != sdfs.size())
        throw InvalidInputError("build_eval_set: scenes/sdfs size mismatch");
    if (bank.empty()) throw InvalidInputError("build_eval_set: empty motion bank");

    // kept starts per scene, in rank order
    std::vector<std::vector<Vec3>> kept(scenes.size());
    size_t total = 0;
    for (size_t s = 0; s < scenes.size(); ++s) {
        auto cands = grid_candidates(scenes[s], skel, cfg.grid_step);
        auto keep_idx = filter_start_candidates(cands, sdfs[s], skel, cfg);
        for (int i : keep_idx) kept[s].push_back(cands[i].pos);
        total += kept[s].size();
    }
    if (total < static_cast<size_t>(cfg.count))
        throw DataError("build_eval_set: only " + std::to_string(total) +
                        " start positions survive the filters, need " +
                        std::to_string(cfg.count) + " (shortfall " +
                        std::to_string(cfg.count - static_cast<int>(total)) + ")");

    // round-robin over scenes for coverage
    std::vector<EvalPair> pairs;
    std::vector<size_t> cursor(scenes.size(), 0);
    size_t scene_i = 0;
    while (pairs.size() < static_cast<size_t>(cfg.count)) {
        size_t tried = 0;
        while (cursor[scene_i] >= kept[scene_i].size() && tried < scenes.size()) {
            scene_i = (scene_i + 1) % scenes.size();
            ++tried;
        }
        if (tried >= scenes.size() && cursor[scene_i] >= kept[scene_i].size()) break;

        EvalPair p;
        p.scene_id = static_cast<int>(scene_i);
        p.start = kept[scene_i][cursor[scene_i]++];
        p.start_yaw = rng.uniform(-kPi, kPi);
        bool assigned = false;
        for (int tries = 0; tries < 10 && !assigned; ++tries) {
            int clip = rng.uniform_int(0, static_cast<int>(bank.size()) - 1);
            if (!label_feasible(bank[clip].label, p.start, sdfs[scene_i])) continue;
            p.clip_id = clip;
            p.label = bank[clip].label;
            assigned = true;
        }
        if (assigned) pairs.push_back(p);
        scene_i = (scene_i + 1) % scenes.size();
    }
    if (pairs.size() < static_cast<size_t>(cfg.count))
        throw DataError("build_eval_set: could not assign feasible labels to enough starts (" +
                        std::to_string(pairs.size()) + " of " + std::to_string(cfg.count) + ")");
    return pairs;
}

namespace {

struct PairOutcome {
    CollisionReport collision;
    SkatingReport skating;
    Vec features;
    int predicted = -1;
    double mjpe = -1.0;
};

void translate_root(MotionSequence& seq, double dx, double dz, double dy) {
    seq.frames.col(0).array() += dx;
    seq.frames.col(1).array() += dz;
    seq.frames.col(3).array() += dy;
}

}  // namespace

EvalReport run_evaluation(const ModelState& state, const std::vector<EvalPair>& pairs,
                          const std::vector<SceneSpec>& scenes,
                          const std::vector<SignedDistanceField>& metric_sdfs,
                          const std::vector<MotionSequence>& bank, const LabelClassifier& clf,
                          const Mat& ref_features, const Skeleton& skel,
                          const EvalRunConfig& cfg, Rng& rng) {
    EvalReport report;
    report.seed = rng.seed();
    report.pairs = static_cast<int>(pairs.size());
    report.w_t = cfg.w_t;

    // scene crops are shared across the sweep; encode once per pair
    std::vector<Mat> tokens(pairs.size());
    if (!cfg.inject_ground_truth && state.has_scene()) {
        for (size_t i = 0; i < pairs.size(); ++i) {
            const EvalPair& p = pairs[i];
            const SceneSpec& scene = scenes[p.scene_id];
            double cell = 2.0 * scene.bounds_half / state.cfg.vol_dims[0];
            VoxelGrid crop = voxelize(scene, state.cfg.vol_dims, cell,
                                      p.start - Vec3::Constant(scene.bounds_half));
            tokens[i] = vit_encode(state, crop);
        }
    }

    for (double ws : cfg.sweep) {
        std::vector<PairOutcome> outcomes(pairs.size());
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= pairs.size()) break;
                const EvalPair& p = pairs[i];
                Rng pair_rng = rng.derive(0xe7a1, i);
                int length = pair_rng.uniform_int(cfg.length_min, cfg.length_max);

                MotionSequence gen;
                if (cfg.inject_ground_truth) {
                    // reference clip regenerated inside the pair's scene,
                    // already in world frame (starts at p.start)
                    SceneSpec local = scenes[p.scene_id];
                    local.bounds_center = p.start;
                    gen = generate_scene_aware_motion(skel, local, nullptr, p.label, length,
                                                      bank[p.clip_id].fps, pair_rng);
                    outcomes[i].mjpe = mjpe(gen, gen, skel);
                    MotionSequence local_frame = gen;
                    translate_root(local_frame, -p.start[0], -p.start[2], 0.0);
                    outcomes[i].features = motion_features(local_frame, skel);
                } else {
                    SamplingContext ctx;
                    ctx.label = p.label;
                    ctx.scene_tokens = state.has_scene() ? &tokens[i] : nullptr;
                    ctx.length = length;
                    gen = ddpm_sample(state, ctx, GuidanceWeights{cfg.w_t, ws}, pair_rng);
                    outcomes[i].features = motion_features(gen, skel);
                    // samples live in the crop frame centered on the start
                    translate_root(gen, p.start[0], p.start[2],
                                   p.start[1] - skel.root_height_standing());
                }
                outcomes[i].predicted = clf.trained()
                                            ? clf.predict(outcomes[i].features)
                                            : -1;
                outcomes[i].collision = collision_metrics(gen, skel, metric_sdfs[p.scene_id]);
                outcomes[i].skating = skating_metrics(gen, skel);
            }
        };
        int n_threads = std::max(1, cfg.threads);
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        SweepRow row;
        row.w_s = ws;
        Mat feats(pairs.size(), feature_dim(skel));
        double cfr_sum = 0, cfr2 = 0, mmp_sum = 0, mmp2 = 0, jcr_sum = 0, jcr2 = 0;
        double skate = 0, ratio = 0, mjpe_sum = 0;
        int correct = 0, mjpe_count = 0;
        for (size_t i = 0; i < outcomes.size(); ++i) {
            const auto& o = outcomes[i];
            feats.row(i) = o.features.transpose();
            cfr_sum += o.collision.cfr;
            cfr2 += o.collision.cfr * o.collision.cfr;
            mmp_sum += o.collision.mmp;
            mmp2 += o.collision.mmp * o.collision.mmp;
            jcr_sum += o.collision.jcr;
            jcr2 += o.collision.jcr * o.collision.jcr;
            skate += o.skating.foot_skating;
            ratio += o.skating.skating_ratio;
            if (o.predicted == pairs[i].label) ++correct;
            if (o.mjpe >= 0.0) {
                mjpe_sum += o.mjpe;
                ++mjpe_count;
            }
        }
        double n = static_cast<double>(pairs.size());
        row.cfr_mean = cfr_sum / n;
        row.cfr_std = std::sqrt(std::max(0.0, cfr2 / n - row.cfr_mean * row.cfr_mean));
        row.mmp_mean = mmp_sum / n;
        row.mmp_std = std::sqrt(std::max(0.0, mmp2 / n - row.mmp_mean * row.mmp_mean));
        row.jcr_mean = jcr_sum / n;
        row.jcr_std = std::sqrt(std::max(0.0, jcr2 / n - row.jcr_mean * row.jcr_mean));
        row.foot_skating = skate / n;
        row.skating_ratio = ratio / n;
        row.label_accuracy = static_cast<double>(correct) / n;
        if (mjpe_count > 0) row.mjpe_mean = mjpe_sum / mjpe_count;
        ToyFidResult fid = toy_fid(feats, ref_features);
        row.toy_fid = fid.value;
        row.fid_regularized = fid.regularized;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace sama
