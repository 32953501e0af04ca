#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "sama/config.hpp"
#include "sama/evalset.hpp"
#include "sama/training.hpp"

namespace sama {

// End-to-end experiment driver. Each phase reads only artifacts declared in
// the manifest, writes its outputs with content hashes, and is skipped on
// re-runs when every output is present with a matching hash and the config
// hash is unchanged. Mismatched (stale) artifacts are refused unless force
// is set.
class Pipeline {
public:
    Pipeline(ExperimentConfig cfg, bool force = false);

    struct RunResult {
        std::vector<std::string> executed;
        std::vector<std::string> skipped;
    };
    // Runs cfg.stages in order (or the given subset, kept in canonical
    // order). Throws with the failing phase named.
    RunResult run(const std::vector<std::string>& only = {});

    void run_phase(const std::string& name);
    bool phase_cached(const std::string& name) const;

    const ExperimentConfig& config() const { return cfg_; }
    std::filesystem::path dir() const { return out_; }
    std::filesystem::path checkpoint_path(int stage) const;
    std::filesystem::path classifier_path() const;
    std::filesystem::path report_dir() const;
    std::filesystem::path train_log_path(int stage) const;

    // dataset loaders shared with the CLI and the acceptance suite
    std::vector<MotionSequence> load_clips(const std::string& subdir) const;
    std::vector<ScenePair> load_scene_pairs(const std::string& subdir) const;
    std::vector<EvalPair> load_eval_pairs() const;
    std::vector<SceneSpec> load_eval_scenes() const;
    Skeleton skeleton() const;

private:
    void gen_data();
    void pretrain();
    void adapt_stage1();
    void adapt_stage2();
    void build_evalset();
    void evaluate();

    void mark_done(const std::string& phase, const std::vector<std::string>& inputs,
                   const std::vector<std::filesystem::path>& outputs, double wall_seconds,
                   uint64_t seed);
    void save_manifest() const;
    void load_manifest();

    ExperimentConfig cfg_;
    bool force_ = false;
    std::filesystem::path out_;
    uint64_t config_hash_ = 0;
    // phase -> {status, seed, inputs, outputs(path->hash), wall}
    struct PhaseRecord {
        bool done = false;
        uint64_t seed = 0;
        double wall_seconds = 0.0;
        std::vector<std::string> inputs;
        std::vector<std::pair<std::string, uint64_t>> outputs;
    };
    std::map<std::string, PhaseRecord> phases_;
};

}  // namespace sama
