#include "sama/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <map>

#include "sama/checkpoint.hpp"
#include "sama/io.hpp"
#include "sama/metrics.hpp"
#include "sama/motion_generator.hpp"
#include "sama/report.hpp"

namespace sama {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kPhaseOrder{"gen-data",      "pretrain",      "adapt-stage1",
                                           "adapt-stage2", "build-evalset", "evaluate"};

std::string zero_pad(int v, int width = 4) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, v);
    return buf;
}

int loco_weighted_label(Rng& rng) {
    static const int pool[10] = {0, 1, 1, 2, 2, 3, 3, 4, 4, 5};
    return pool[rng.uniform_int(0, 9)];
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig cfg, bool force) : cfg_(std::move(cfg)), force_(force) {
    require_valid(cfg_);
    const char* cache = std::getenv("SAMA_CACHE_DIR");
    fs::path base = cfg_.out_dir;
    if (cache && *cache && base.is_relative()) base = fs::path(cache) / base;
    out_ = base;
    config_hash_ = cfg_.hash();
    fs::create_directories(out_);
    cfg_.save(out_ / "config.json");
    load_manifest();
}

fs::path Pipeline::checkpoint_path(int stage) const {
    return out_ / "checkpoints" / ("stage" + std::to_string(stage) + ".ckpt");
}
fs::path Pipeline::classifier_path() const { return out_ / "checkpoints" / "classifier.bin"; }
fs::path Pipeline::report_dir() const { return out_ / "report"; }
fs::path Pipeline::train_log_path(int stage) const {
    return out_ / "logs" / ("train_stage" + std::to_string(stage) + ".csv");
}

Skeleton Pipeline::skeleton() const { return Skeleton::default_five_joint(); }

void Pipeline::load_manifest() {
    fs::path p = out_ / "manifest.json";
    phases_.clear();
    if (!fs::exists(p)) return;
    json j = json::parse(read_text_file(p));
    if (j.value("config_hash", std::string()) != std::to_string(config_hash_)) {
        if (!force_)
            throw DataError("manifest at " + p.string() +
                            " was produced by a different config; use --force to regenerate");
        phases_.clear();
        return;
    }
    for (auto& [name, rec] : j.at("phases").items()) {
        PhaseRecord r;
        r.done = rec.value("status", "") == "done";
        r.seed = rec.value("seed", 0ull);
        r.wall_seconds = rec.value("wall_seconds", 0.0);
        for (const auto& i : rec.value("inputs", json::array())) r.inputs.push_back(i);
        for (const auto& o : rec.value("outputs", json::array()))
            r.outputs.emplace_back(o.at("path").get<std::string>(), o.at("hash").get<uint64_t>());
        phases_[name] = std::move(r);
    }
}

void Pipeline::save_manifest() const {
    json j;
    j["version"] = 1;
    j["config_hash"] = std::to_string(config_hash_);
    json ph = json::object();
    for (const auto& [name, r] : phases_) {
        json rec;
        rec["status"] = r.done ? "done" : "pending";
        rec["seed"] = r.seed;
        rec["wall_seconds"] = r.wall_seconds;
        rec["inputs"] = r.inputs;
        json outs = json::array();
        for (const auto& [path, hash] : r.outputs)
            outs.push_back({{"path", path}, {"hash", hash}});
        rec["outputs"] = outs;
        ph[name] = rec;
    }
    j["phases"] = ph;
    write_text_file(out_ / "manifest.json", j.dump(2) + "\n");
}

bool Pipeline::phase_cached(const std::string& name) const {
    auto it = phases_.find(name);
    if (it == phases_.end() || !it->second.done) return false;
    for (const auto& [rel, hash] : it->second.outputs) {
        fs::path p = out_ / rel;
        if (!fs::exists(p)) return false;
        if (file_hash(p) != hash) {
            if (force_) return false;
            throw DataError("stale artifact " + p.string() + " for phase '" + name +
                            "' (hash mismatch); use --force to regenerate");
        }
    }
    return true;
}

void Pipeline::mark_done(const std::string& phase, const std::vector<std::string>& inputs,
                         const std::vector<fs::path>& outputs, double wall_seconds,
                         uint64_t seed) {
    PhaseRecord r;
    r.done = true;
    r.seed = seed;
    r.wall_seconds = wall_seconds;
    r.inputs = inputs;
    for (const auto& p : outputs)
        r.outputs.emplace_back(fs::relative(p, out_).string(), file_hash(p));
    phases_[phase] = std::move(r);
    save_manifest();
}

Pipeline::RunResult Pipeline::run(const std::vector<std::string>& only) {
    std::vector<std::string> wanted = only.empty() ? cfg_.stages : only;
    RunResult res;
    for (const auto& name : kPhaseOrder) {
        if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        if (phase_cached(name)) {
            res.skipped.push_back(name);
            continue;
        }
        try {
            run_phase(name);
        } catch (const std::exception& e) {
            throw std::runtime_error("phase '" + name + "' failed: " + e.what());
        }
        res.executed.push_back(name);
    }
    return res;
}

void Pipeline::run_phase(const std::string& name) {
    if (name == "gen-data") gen_data();
    else if (name == "pretrain") pretrain();
    else if (name == "adapt-stage1") adapt_stage1();
    else if (name == "adapt-stage2") adapt_stage2();
    else if (name == "build-evalset") build_evalset();
    else if (name == "evaluate") evaluate();
    else throw ConfigError("unknown phase '" + name + "'");
}

// ---------------------------------------------------------------- gen-data

void Pipeline::gen_data() {
    auto t0 = std::chrono::steady_clock::now();
    Skeleton skel = skeleton();
    Rng root(cfg_.seed);
    std::vector<fs::path> outputs;

    auto gen_clip_set = [&](const std::string& subdir, int count, uint64_t stream,
                            bool round_robin_labels) {
        Rng rng = root.derive(stream);
        for (int i = 0; i < count; ++i) {
            int label = round_robin_labels ? i % cfg_.labels : loco_weighted_label(rng);
            int length = rng.uniform_int(cfg_.min_frames, cfg_.max_frames);
            Rng clip_rng = rng.derive(0xc11b, i);
            MotionSequence seq = generate_motion(skel, label, length, cfg_.fps, clip_rng);
            fs::path p = out_ / "data" / subdir / ("clip_" + zero_pad(i) + ".smf");
            save_motion(p, seq, skel.joint_count());
            outputs.push_back(p);
        }
    };
    gen_clip_set("train", cfg_.train_clips, 0x01, true);
    gen_clip_set("heldout", cfg_.heldout_clips, 0x02, true);

    auto gen_pair_set = [&](const std::string& subdir, int count, uint64_t stream) {
        Rng rng = root.derive(stream);
        for (int i = 0; i < count; ++i) {
            SceneDifficulty diff = rng.uniform() < cfg_.scene_dense_fraction
                                       ? SceneDifficulty::Dense
                                       : SceneDifficulty::Sparse;
            Rng scene_rng = rng.derive(0x5ce1e, i);
            SceneSpec scene = generate_scene(scene_rng, diff,
                                             Vec3(0, skel.root_height_standing(), 0),
                                             cfg_.bounds_half);
            SignedDistanceField sdf = scene_sdf(scene, cfg_.generator_sdf_dims);
            int label = loco_weighted_label(rng);
            int length = rng.uniform_int(cfg_.min_frames, cfg_.max_frames);
            Rng clip_rng = rng.derive(0xc11c, i);
            MotionSequence seq =
                generate_scene_aware_motion(skel, scene, &sdf, label, length, cfg_.fps, clip_rng);
            fs::path pm = out_ / "data" / subdir / ("pair_" + zero_pad(i) + ".smf");
            fs::path ps = out_ / "data" / subdir / ("scene_" + zero_pad(i) + ".txt");
            save_motion(pm, seq, skel.joint_count());
            save_scene(ps, scene);
            outputs.push_back(pm);
            outputs.push_back(ps);
        }
    };
    gen_pair_set("pairs", cfg_.scene_pairs, 0x03);
    gen_pair_set("heldout_pairs", cfg_.heldout_scene_pairs, 0x04);

    // label classifier, trained once on ground-truth clips
    {
        Rng rng = root.derive(0x05);
        int per = cfg_.classifier_clips_per_label;
        Mat feats(per * cfg_.labels, feature_dim(skel));
        std::vector<int> labels(per * cfg_.labels);
        for (int l = 0; l < cfg_.labels; ++l)
            for (int i = 0; i < per; ++i) {
                int length = rng.uniform_int(cfg_.min_frames, cfg_.max_frames);
                Rng clip_rng = rng.derive(0xc11d, l * per + i);
                MotionSequence seq = generate_motion(skel, l, length, cfg_.fps, clip_rng);
                feats.row(l * per + i) = motion_features(seq, skel).transpose();
                labels[l * per + i] = l;
            }
        Rng train_rng = root.derive(0x06);
        LabelClassifier clf =
            LabelClassifier::train(feats, labels, cfg_.labels, train_rng);
        double acc = clf.accuracy(feats, labels);
        if (acc < 0.95)
            throw DataError("classifier acceptance gate failed: train accuracy " +
                            std::to_string(acc) + " < 0.95");
        clf.save(classifier_path());
        outputs.push_back(classifier_path());
    }

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("gen-data", {"config.json"}, outputs, wall, cfg_.seed);
}

std::vector<MotionSequence> Pipeline::load_clips(const std::string& subdir) const {
    std::vector<MotionSequence> out;
    fs::path dir = out_ / "data" / subdir;
    if (!fs::exists(dir)) throw DataError("dataset missing: " + dir.string() +
                                          " (run gen-data first)");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".smf") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_motion(f));
    return out;
}

std::vector<ScenePair> Pipeline::load_scene_pairs(const std::string& subdir) const {
    std::vector<ScenePair> out;
    fs::path dir = out_ / "data" / subdir;
    if (!fs::exists(dir)) throw DataError("dataset missing: " + dir.string() +
                                          " (run gen-data first)");
    std::vector<fs::path> motions;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".smf") motions.push_back(e.path());
    std::sort(motions.begin(), motions.end());
    ModelConfig mc = cfg_.model_config();
    for (const auto& m : motions) {
        ScenePair p;
        p.motion = load_motion(m);
        fs::path scene_file = m;
        scene_file.replace_filename("scene_" + m.stem().string().substr(5) + ".txt");
        p.scene = load_scene(scene_file);
        // voxel crop centered at the clip's initial root position
        Vec3 start(p.motion.frames(0, 0), skeleton().root_height_standing(),
                   p.motion.frames(0, 1));
        double cell = 2.0 * p.scene.bounds_half / mc.vol_dims[0];
        p.grid = voxelize(p.scene, mc.vol_dims, cell, start - Vec3::Constant(p.scene.bounds_half));
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------- training

void Pipeline::pretrain() {
    auto t0 = std::chrono::steady_clock::now();
    auto data = load_clips("train");
    Rng init_rng(Rng::mix(cfg_.seed, 0x10));
    ModelState state =
        init_backbone(cfg_.model_config(), NoiseSchedule::cosine(cfg_.timesteps), init_rng);
    state.config_hash = config_hash_;
    TrainOptions opt = cfg_.train_options(0);
    TrainLog log;
    train_stage0(state, data, opt, skeleton(), &log);
    log.save_csv(train_log_path(0));
    save_checkpoint(checkpoint_path(0), state);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("pretrain", {"config.json", "data/train"},
              {checkpoint_path(0), train_log_path(0)}, wall, opt.seed);
}

void Pipeline::adapt_stage1() {
    auto t0 = std::chrono::steady_clock::now();
    auto data = load_clips("train");
    ModelState state = load_checkpoint(checkpoint_path(0));
    Rng init_rng(Rng::mix(cfg_.seed, 0x11));
    add_cakey_layers(state, init_rng);
    state.freeze.backbone = true;
    state.freeze.null_text = true;
    TrainOptions opt = cfg_.train_options(1);
    TrainLog log;
    train_stage1(state, data, opt, skeleton(), &log);
    log.save_csv(train_log_path(1));
    save_checkpoint(checkpoint_path(1), state);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("adapt-stage1", {"config.json", "data/train", "checkpoints/stage0.ckpt"},
              {checkpoint_path(1), train_log_path(1)}, wall, opt.seed);
}

void Pipeline::adapt_stage2() {
    auto t0 = std::chrono::steady_clock::now();
    auto pairs = load_scene_pairs("pairs");
    auto prior = load_clips("train");
    ModelState state = load_checkpoint(checkpoint_path(1));
    Rng init_rng(Rng::mix(cfg_.seed, 0x12));
    add_scene_layers(state, init_rng);
    state.freeze.backbone = true;
    state.freeze.cakey = true;
    state.freeze.null_text = true;
    TrainOptions opt = cfg_.train_options(2);
    TrainLog log;
    train_stage2(state, pairs, prior, opt, skeleton(), &log);
    log.save_csv(train_log_path(2));
    save_checkpoint(checkpoint_path(2), state);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("adapt-stage2",
              {"config.json", "data/pairs", "data/train", "checkpoints/stage1.ckpt"},
              {checkpoint_path(2), train_log_path(2)}, wall, opt.seed);
}

// ---------------------------------------------------------------- eval

void Pipeline::build_evalset() {
    auto t0 = std::chrono::steady_clock::now();
    Skeleton skel = skeleton();
    auto bank = load_clips("heldout");
    Rng rng(Rng::mix(cfg_.seed, 0x13));
    SceneDifficulty diff = scene_difficulty_from_string(cfg_.eval_difficulty);

    std::vector<SceneSpec> scenes;
    std::vector<SignedDistanceField> sdfs;
    std::vector<fs::path> outputs;
    for (int i = 0; i < cfg_.eval_scenes; ++i) {
        Rng srng = rng.derive(0xe5ce, i);
        SceneSpec scene =
            generate_scene(srng, diff, Vec3(0, skel.root_height_standing(), 0), cfg_.bounds_half);
        fs::path p = out_ / "evalset" / ("scene_" + zero_pad(i, 3) + ".txt");
        save_scene(p, scene);
        outputs.push_back(p);
        sdfs.push_back(scene_sdf(scene, cfg_.metrics_sdf_dims));
        scenes.push_back(std::move(scene));
    }

    EvalSetConfig ecfg;
    ecfg.count = cfg_.evalset_count;
    ecfg.grid_step = cfg_.evalset_grid_step;
    ecfg.min_sdf = cfg_.evalset_min_sdf;
    ecfg.keep_frac = cfg_.evalset_keep_frac;
    Rng pair_rng = rng.derive(0x9a1e);
    auto pairs = build_eval_set(scenes, sdfs, bank, skel, ecfg, pair_rng);

    json j;
    j["version"] = 1;
    j["pairs"] = json::array();
    for (const auto& p : pairs)
        j["pairs"].push_back({{"scene_id", p.scene_id},
                              {"clip_id", p.clip_id},
                              {"label", p.label},
                              {"start", {p.start[0], p.start[1], p.start[2]}},
                              {"start_yaw", p.start_yaw}});
    fs::path pj = out_ / "evalset" / "pairs.json";
    write_text_file(pj, j.dump(2) + "\n");
    outputs.push_back(pj);

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("build-evalset", {"config.json", "data/heldout"}, outputs, wall, pair_rng.seed());
}

std::vector<EvalPair> Pipeline::load_eval_pairs() const {
    fs::path pj = out_ / "evalset" / "pairs.json";
    if (!fs::exists(pj)) throw DataError("eval set missing: " + pj.string());
    json j = json::parse(read_text_file(pj));
    std::vector<EvalPair> pairs;
    for (const auto& rec : j.at("pairs")) {
        EvalPair p;
        p.scene_id = rec.at("scene_id");
        p.clip_id = rec.at("clip_id");
        p.label = rec.at("label");
        p.start = Vec3(rec.at("start")[0], rec.at("start")[1], rec.at("start")[2]);
        p.start_yaw = rec.at("start_yaw");
        pairs.push_back(p);
    }
    return pairs;
}

std::vector<SceneSpec> Pipeline::load_eval_scenes() const {
    std::vector<SceneSpec> scenes;
    for (int i = 0;; ++i) {
        fs::path p = out_ / "evalset" / ("scene_" + zero_pad(i, 3) + ".txt");
        if (!fs::exists(p)) break;
        scenes.push_back(load_scene(p));
    }
    if (scenes.empty()) throw DataError("no eval scenes under " + (out_ / "evalset").string());
    return scenes;
}

void Pipeline::evaluate() {
    auto t0 = std::chrono::steady_clock::now();
    Skeleton skel = skeleton();
    if (!fs::exists(checkpoint_path(2)))
        throw DataError("evaluate needs " + checkpoint_path(2).string() +
                        " (run adapt-stage2 first)");
    ModelState state = load_checkpoint(checkpoint_path(2));
    auto pairs = load_eval_pairs();
    auto scenes = load_eval_scenes();
    auto bank = load_clips("heldout");
    LabelClassifier clf = LabelClassifier::load(classifier_path());

    std::vector<SignedDistanceField> sdfs;
    sdfs.reserve(scenes.size());
    for (const auto& s : scenes) sdfs.push_back(scene_sdf(s, cfg_.metrics_sdf_dims));

    Mat ref_features(bank.size(), feature_dim(skel));
    for (size_t i = 0; i < bank.size(); ++i)
        ref_features.row(i) = motion_features(bank[i], skel).transpose();

    EvalRunConfig ecfg;
    ecfg.sweep = cfg_.sweep;
    ecfg.w_t = cfg_.w_t;
    ecfg.length_min = cfg_.min_frames;
    ecfg.length_max = cfg_.max_frames;
    ecfg.threads = cfg_.threads;
    Rng rng(Rng::mix(cfg_.seed, 0x14));
    EvalReport report =
        run_evaluation(state, pairs, scenes, sdfs, bank, clf, ref_features, skel, ecfg, rng);
    write_report(report_dir(), report);

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mark_done("evaluate",
              {"config.json", "checkpoints/stage2.ckpt", "checkpoints/classifier.bin",
               "evalset/pairs.json", "data/heldout"},
              {report_dir() / "report.json", report_dir() / "report.txt",
               report_dir() / "cfr_vs_ws.svg", report_dir() / "toyfid_vs_ws.svg"},
              wall, rng.seed());
}

}  // namespace sama
