#include "sama/training.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "sama/nn/optimizer.hpp"

namespace sama {

void TrainLog::save_csv(const std::filesystem::path& path) const {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os << "step,total,t2m,joints,vel\n";
    os.precision(12);
    for (const auto& r : rows)
        os << r.step << "," << r.total << "," << r.t2m << "," << r.joints << "," << r.vel
           << "\n";
}

TrainLog TrainLog::load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path.string());
    TrainLog log;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        TrainLogRow r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &r.step, &r.total, &r.t2m,
                        &r.joints, &r.vel) == 5)
            log.rows.push_back(r);
    }
    return log;
}

double TrainLog::moving_avg(int step, int window) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rows) {
        if (r.step <= step && r.step > step - window) {
            sum += r.total;
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

NormStats compute_norm_stats(const std::vector<MotionSequence>& data) {
    if (data.empty()) throw ConfigError("compute_norm_stats: empty dataset");
    const int D = data[0].dim();
    Vec sum = Vec::Zero(D), sum2 = Vec::Zero(D);
    int64_t n = 0;
    for (const auto& seq : data) {
        for (int i = 0; i < seq.valid_length; ++i) {
            sum += seq.frames.row(i).transpose();
            sum2 += seq.frames.row(i).transpose().cwiseProduct(seq.frames.row(i).transpose());
            ++n;
        }
    }
    NormStats s;
    s.mean = sum / n;
    s.stddev = (sum2 / n - s.mean.cwiseProduct(s.mean)).cwiseMax(0.0).cwiseSqrt();
    for (int c = 0; c < D; ++c)
        if (s.stddev[c] < 1e-4) s.stddev[c] = 1.0;  // constant channel
    return s;
}

namespace {

struct ItemSpec {
    const MotionSequence* motion = nullptr;
    const VoxelGrid* grid = nullptr;  // scene batch
    bool use_null_scene = false;      // model has scene layers but no grid
    std::optional<int> label;
    bool with_mask = false;
    int stride = 20;
    bool geometric = true;  // include FK losses
    uint64_t rng_a = 0, rng_b = 0;
};

struct ItemResult {
    std::vector<Mat> grads;
    LossBreakdown parts;
    double total = 0.0;
};

ItemResult run_item(const ModelState& state, const Skeleton& skel,
                    const std::vector<std::pair<std::string, Mat*>>& trainable,
                    const TrainOptions& opt, const ItemSpec& item, Rng rng) {
    const MotionSequence& seq = *item.motion;
    const int N = seq.valid_length;
    Mat x0_norm = state.norm.normalize(seq.frames, N);

    int t = rng.uniform_int(1, state.schedule.timesteps);
    Rng noise_rng = rng.derive(0xabc1);
    Mat x_t = forward_noise(x0_norm, N, t, state.schedule, noise_rng);

    KeyframeMask mask;
    Condition cond;
    cond.label = item.label;
    cond.valid_length = N;
    if (item.with_mask) {
        Rng mask_rng = rng.derive(0xabc2);
        mask = sample_keyframe_mask(N, item.stride, mask_rng);
        cond.mask = &mask;
        cond.keyvals_norm = &x0_norm;
    }
    if (item.grid) cond.scene_grid = item.grid;

    nn::Tape tape;
    ParamBinder binder(tape);
    binder.bind_trainable(trainable);
    nn::Var xhat = model_forward(tape, binder, state, x_t.topRows(N), t, cond);

    nn::Var loss = tape.mse(xhat, x0_norm.topRows(N), N);
    ItemResult res;
    res.parts.t2m = tape.val(loss)(0, 0);
    if (item.geometric) {
        nn::Var geo = geometric_loss_op(tape, xhat, seq.frames.topRows(N), skel, state.norm, N,
                                        opt.lambda_joints, opt.lambda_vel, &res.parts);
        loss = tape.add(loss, geo);
    }
    res.total = tape.val(loss)(0, 0);
    tape.backward(loss);
    res.grads = binder.take_grads();
    for (Mat& g : res.grads)
        if (g.size() == 0) g = Mat();  // untouched parameters contribute nothing
    return res;
}

// Deterministic batch-parallel gradient accumulation: per-item rngs depend
// only on (seed, step, slot) and the reduction runs in slot order, so the
// result is independent of the thread count.
void run_batch(const ModelState& state, const Skeleton& skel,
               const std::vector<std::pair<std::string, Mat*>>& trainable,
               const TrainOptions& opt, const std::vector<ItemSpec>& items, Rng& master,
               std::vector<Mat>& grads_out, LossBreakdown& parts_out, double& total_out) {
    std::vector<ItemResult> results(items.size());
    int n_threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(items.size())));
    if (n_threads == 1) {
        for (size_t i = 0; i < items.size(); ++i)
            results[i] =
                run_item(state, skel, trainable, opt, items[i],
                         master.derive(items[i].rng_a, items[i].rng_b));
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back([&]() {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= items.size()) break;
                    results[i] =
                        run_item(state, skel, trainable, opt, items[i],
                                 master.derive(items[i].rng_a, items[i].rng_b));
                }
            });
        for (auto& th : pool) th.join();
    }

    double scale = 1.0 / items.size();
    grads_out.assign(trainable.size(), Mat());
    parts_out = LossBreakdown{};
    total_out = 0.0;
    for (size_t i = 0; i < results.size(); ++i) {
        for (size_t p = 0; p < trainable.size(); ++p) {
            if (results[i].grads[p].size() == 0) continue;
            if (grads_out[p].size() == 0)
                grads_out[p] = scale * results[i].grads[p];
            else
                grads_out[p] += scale * results[i].grads[p];
        }
        parts_out.t2m += scale * results[i].parts.t2m;
        parts_out.joints += scale * results[i].parts.joints;
        parts_out.vel += scale * results[i].parts.vel;
        total_out += scale * results[i].total;
    }
    // parameters with no gradient this batch still need a slot for AdamW
    for (size_t p = 0; p < trainable.size(); ++p)
        if (grads_out[p].size() == 0)
            grads_out[p] = Mat::Zero(trainable[p].second->rows(), trainable[p].second->cols());
}

struct FreezeGuard {
    ModelState& state;
    std::vector<std::pair<std::string, uint64_t>> frozen;

    FreezeGuard(ModelState& s, const std::vector<std::string>& groups) : state(s) {
        for (const auto& g : groups) frozen.emplace_back(g, params_checksum(s, g));
    }
    void verify(const char* where) const {
        for (const auto& [g, h] : frozen)
            if (params_checksum(state, g) != h)
                throw ConfigError(std::string("frozen group '") + g + "' changed during " +
                                  where);
    }
};

std::vector<Mat*> param_ptrs(const std::vector<std::pair<std::string, Mat*>>& named) {
    std::vector<Mat*> out;
    out.reserve(named.size());
    for (auto& [n, m] : named) out.push_back(m);
    return out;
}

}  // namespace

void train_stage0(ModelState& state, const std::vector<MotionSequence>& data,
                  const TrainOptions& opt, const Skeleton& skel, TrainLog* log) {
    if (data.empty()) throw ConfigError("train_stage0: empty dataset");
    if (state.has_cakey() || state.has_scene())
        throw ConfigError("train_stage0: expects a bare backbone");
    state.norm = compute_norm_stats(data);
    state.freeze = FreezeFlags{};  // backbone and null text train

    auto trainable = collect_params(state, "backbone");
    auto nulls = collect_params(state, "nulls");
    trainable.insert(trainable.end(), nulls.begin(), nulls.end());
    nn::AdamW optim(param_ptrs(trainable), {.lr = opt.lr});
    Rng master(opt.seed);
    state.train_seed = opt.seed;

    for (int step = 0; step < opt.steps; ++step) {
        Rng pick = master.derive(0x5e1ec7, step);
        std::vector<ItemSpec> items(opt.batch);
        for (int b = 0; b < opt.batch; ++b) {
            ItemSpec& it = items[b];
            it.motion = &data[pick.uniform_int(0, static_cast<int>(data.size()) - 1)];
            it.label = it.motion->label;
            if (pick.uniform() < opt.text_dropout) it.label.reset();
            it.rng_a = static_cast<uint64_t>(step);
            it.rng_b = 0x100 + b;
        }
        std::vector<Mat> grads;
        LossBreakdown parts;
        double total = 0.0;
        run_batch(state, skel, trainable, opt, items, master, grads, parts, total);
        if (opt.grad_clip > 0.0) nn::clip_grad_norm(grads, opt.grad_clip);
        optim.step(grads);
        ++state.train_step;
        if (log && (step % opt.log_every == 0 || step == opt.steps - 1))
            log->rows.push_back({step, total, parts.t2m, parts.joints, parts.vel});
    }
}

void train_stage1(ModelState& state, const std::vector<MotionSequence>& data,
                  const TrainOptions& opt, const Skeleton& skel, TrainLog* log) {
    if (data.empty()) throw ConfigError("train_stage1: empty dataset");
    if (!state.has_cakey()) throw ConfigError("train_stage1: cakey layers missing");
    if (!state.freeze.backbone || !state.freeze.null_text)
        throw ConfigError("train_stage1: protocol violation, backbone must be frozen");
    if (state.norm.empty()) throw ConfigError("train_stage1: backbone is not pretrained");

    auto trainable = collect_params(state, "cakey");
    FreezeGuard guard(state, {"backbone", "nulls"});
    nn::AdamW optim(param_ptrs(trainable), {.lr = opt.lr});
    Rng master(opt.seed);

    for (int step = 0; step < opt.steps; ++step) {
        Rng pick = master.derive(0x57a6e1, step);
        std::vector<ItemSpec> items(opt.batch);
        for (int b = 0; b < opt.batch; ++b) {
            ItemSpec& it = items[b];
            it.motion = &data[pick.uniform_int(0, static_cast<int>(data.size()) - 1)];
            it.label.reset();  // inbetweening trains with the null text embedding
            it.with_mask = true;
            it.stride = opt.stride;
            it.rng_a = static_cast<uint64_t>(step);
            it.rng_b = 0x200 + b;
        }
        std::vector<Mat> grads;
        LossBreakdown parts;
        double total = 0.0;
        run_batch(state, skel, trainable, opt, items, master, grads, parts, total);
        if (opt.grad_clip > 0.0) nn::clip_grad_norm(grads, opt.grad_clip);
        optim.step(grads);
        ++state.train_step;
        if (step % 200 == 0) guard.verify("stage 1");
        if (log && (step % opt.log_every == 0 || step == opt.steps - 1))
            log->rows.push_back({step, total, parts.t2m, parts.joints, parts.vel});
    }
    guard.verify("stage 1");
}

void train_stage2(ModelState& state, const std::vector<ScenePair>& scene_data,
                  const std::vector<MotionSequence>& prior_data, const TrainOptions& opt,
                  const Skeleton& skel, TrainLog* log) {
    if (scene_data.empty()) throw ConfigError("train_stage2: empty scene-motion dataset");
    if (!state.has_scene()) throw ConfigError("train_stage2: scene layers missing");
    if (!state.freeze.backbone || !state.freeze.cakey || !state.freeze.null_text)
        throw ConfigError("train_stage2: protocol violation, backbone and cakey must be frozen");
    if (opt.prior_ratio > 0.0 && prior_data.empty())
        throw ConfigError("train_stage2: prior loss enabled but prior dataset is empty");

    auto trainable = collect_params(state, "scenecond");
    trainable.emplace_back("null_scene", &state.null_scene);
    FreezeGuard guard(state, {"backbone", "cakey"});
    uint64_t null_text_sum = fnv1a(state.null_text.data(), sizeof(double) * state.null_text.size());
    nn::AdamW optim(param_ptrs(trainable), {.lr = opt.lr});
    Rng master(opt.seed);

    double prior_acc = 0.0;
    for (int step = 0; step < opt.steps; ++step) {
        prior_acc += opt.prior_ratio;
        bool prior_batch = prior_acc >= 1.0;
        if (prior_batch) prior_acc -= 1.0;

        Rng pick = master.derive(0x57a6e2, step);
        std::vector<ItemSpec> items(opt.batch);
        for (int b = 0; b < opt.batch; ++b) {
            ItemSpec& it = items[b];
            if (prior_batch) {
                it.motion = &prior_data[pick.uniform_int(0, static_cast<int>(prior_data.size()) - 1)];
                it.label = it.motion->label;
                if (pick.uniform() < opt.text_dropout) it.label.reset();
                it.use_null_scene = true;
                it.geometric = false;  // prior batches use the plain reconstruction loss
            } else {
                const ScenePair& sp =
                    scene_data[pick.uniform_int(0, static_cast<int>(scene_data.size()) - 1)];
                it.motion = &sp.motion;
                it.grid = &sp.grid;
                if (pick.uniform() < opt.scene_dropout) {
                    it.grid = nullptr;  // null-scene dropout for guidance
                    it.use_null_scene = true;
                }
                it.label.reset();
                it.with_mask = true;
                it.stride = opt.stride;
            }
            it.rng_a = static_cast<uint64_t>(step);
            it.rng_b = 0x300 + b;
        }
        std::vector<Mat> grads;
        LossBreakdown parts;
        double total = 0.0;
        run_batch(state, skel, trainable, opt, items, master, grads, parts, total);
        if (opt.grad_clip > 0.0) nn::clip_grad_norm(grads, opt.grad_clip);
        optim.step(grads);
        ++state.train_step;
        if (step % 200 == 0) guard.verify("stage 2");
        if (log && (step % opt.log_every == 0 || step == opt.steps - 1))
            log->rows.push_back({step, total, parts.t2m, parts.joints, parts.vel});
    }
    guard.verify("stage 2");
    if (fnv1a(state.null_text.data(), sizeof(double) * state.null_text.size()) != null_text_sum)
        throw ConfigError("frozen null text embedding changed during stage 2");
}

}  // namespace sama
