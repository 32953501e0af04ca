#pragma once

#include <filesystem>
#include <vector>

#include "sama/common.hpp"
#include "sama/motion.hpp"
#include "sama/rng.hpp"
#include "sama/scene.hpp"
#include "sama/skeleton.hpp"

namespace sama {

struct MetricThresholds {
    double collision_delta = 0.02;   // m, penetration tolerance
    double contact_height = 0.05;    // m, foot height counting as contact
    double contact_velocity = 0.025; // m/frame, skating threshold
};

// Mean joint position error over all frames or only keyframes (mask != null).
double mjpe(const MotionSequence& gen, const MotionSequence& gt, const Skeleton& skel,
            const KeyframeMask* keyframes_only = nullptr);

struct SkatingReport {
    double foot_skating = 0.0;   // mean horizontal displacement in contact, m/frame
    double skating_ratio = 0.0;  // fraction of contact frames above the velocity threshold
};
SkatingReport skating_metrics(const MotionSequence& gen, const Skeleton& skel,
                              const MetricThresholds& thr = {});

struct CollisionReport {
    double cfr = 0.0;  // fraction of frames with any penetration
    double mmp = 0.0;  // mean over colliding frames of the deepest penetration, m
    double jcr = 0.0;  // mean over colliding frames of the fraction of joints penetrating
    std::vector<double> worst_sdf_per_frame;
};
CollisionReport collision_metrics(const MotionSequence& gen, const Skeleton& skel,
                                  const SignedDistanceField& sdf,
                                  const MetricThresholds& thr = {});

// Fixed statistics vector: per-channel mean and std, per-joint mean speed,
// root path length, mean yaw rate, net root displacement.
Vec motion_features(const MotionSequence& seq, const Skeleton& skel);
int feature_dim(const Skeleton& skel);

struct ToyFidResult {
    double value = 0.0;
    bool regularized = false;  // singular covariance handled with 1e-6 * I
};
// Frechet distance between Gaussian fits of the two feature sets (rows =
// clips).
ToyFidResult toy_fid(const Mat& gen_features, const Mat& ref_features);

// Small MLP on the feature vector, trained once on ground-truth clips.
class LabelClassifier {
public:
    LabelClassifier() = default;

    static LabelClassifier train(const Mat& features, const std::vector<int>& labels,
                                 int n_labels, Rng& rng, int hidden = 64, int epochs = 300,
                                 double lr = 1e-2);

    int predict(const Vec& feature) const;
    double accuracy(const Mat& features, const std::vector<int>& labels) const;

    void save(const std::filesystem::path& path) const;
    static LabelClassifier load(const std::filesystem::path& path);

    bool trained() const { return w1_.size() > 0; }

private:
    Vec feat_mean_, feat_std_;
    Mat w1_, b1_, w2_, b2_;
};

}  // namespace sama
