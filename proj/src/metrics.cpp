#include "sama/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>

#include "sama/nn/optimizer.hpp"
#include "sama/nn/tape.hpp"

namespace sama {

double mjpe(const MotionSequence& gen, const MotionSequence& gt, const Skeleton& skel,
            const KeyframeMask* keyframes_only) {
    if (gen.valid_length != gt.valid_length)
        throw InvalidInputError("mjpe: valid lengths differ (" +
                                std::to_string(gen.valid_length) + " vs " +
                                std::to_string(gt.valid_length) + ")");
    if (keyframes_only && keyframes_only->size() != gen.valid_length)
        throw InvalidInputError("mjpe: mask length mismatch");
    const int J = skel.joint_count();
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < gen.valid_length; ++i) {
        if (keyframes_only && !keyframes_only->bits[i]) continue;
        Mat pg = forward_kinematics(skel, gen.frames.row(i).transpose());
        Mat pt = forward_kinematics(skel, gt.frames.row(i).transpose());
        for (int j = 0; j < J; ++j) {
            sum += (pg.row(j) - pt.row(j)).norm();
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

SkatingReport skating_metrics(const MotionSequence& gen, const Skeleton& skel,
                              const MetricThresholds& thr) {
    const auto& feet = skel.foot_joints();
    Mat pos = fk_sequence(skel, gen.frames.topRows(gen.valid_length));
    SkatingReport rep;
    double disp_sum = 0.0;
    int contacts = 0, skating = 0;
    for (int i = 0; i + 1 < gen.valid_length; ++i) {
        for (int f : feet) {
            double h = pos(i, 3 * f + 1);
            if (h > thr.contact_height) continue;
            double dx = pos(i + 1, 3 * f) - pos(i, 3 * f);
            double dz = pos(i + 1, 3 * f + 2) - pos(i, 3 * f + 2);
            double disp = std::hypot(dx, dz);
            disp_sum += disp;
            ++contacts;
            if (disp > thr.contact_velocity) ++skating;
        }
    }
    if (contacts > 0) {
        rep.foot_skating = disp_sum / contacts;
        rep.skating_ratio = static_cast<double>(skating) / contacts;
    }
    return rep;
}

CollisionReport collision_metrics(const MotionSequence& gen, const Skeleton& skel,
                                  const SignedDistanceField& sdf,
                                  const MetricThresholds& thr) {
    const int J = skel.joint_count();
    CollisionReport rep;
    rep.worst_sdf_per_frame.resize(gen.valid_length);
    int colliding_frames = 0;
    double depth_sum = 0.0, extent_sum = 0.0;
    for (int i = 0; i < gen.valid_length; ++i) {
        Mat pos = forward_kinematics(skel, gen.frames.row(i).transpose());
        double worst = std::numeric_limits<double>::infinity();
        int colliding = 0;
        double deepest = 0.0;
        for (int j = 0; j < J; ++j) {
            double d = sdf_query(sdf, pos.row(j).transpose());
            worst = std::min(worst, d);
            if (d < -thr.collision_delta) {
                ++colliding;
                deepest = std::max(deepest, -d);
            }
        }
        rep.worst_sdf_per_frame[i] = worst;
        if (colliding > 0) {
            ++colliding_frames;
            depth_sum += deepest;
            extent_sum += static_cast<double>(colliding) / J;
        }
    }
    if (gen.valid_length > 0)
        rep.cfr = static_cast<double>(colliding_frames) / gen.valid_length;
    if (colliding_frames > 0) {
        rep.mmp = depth_sum / colliding_frames;
        rep.jcr = extent_sum / colliding_frames;
    }
    return rep;
}

int feature_dim(const Skeleton& skel) {
    return 2 * skel.pose_dim() + skel.joint_count() + 3;
}

Vec motion_features(const MotionSequence& seq, const Skeleton& skel) {
    const int D = seq.dim();
    const int J = skel.joint_count();
    const int n = seq.valid_length;
    Vec f = Vec::Zero(feature_dim(skel));
    Mat valid = seq.frames.topRows(n);
    int k = 0;
    for (int c = 0; c < D; ++c) f[k++] = valid.col(c).mean();
    for (int c = 0; c < D; ++c) {
        double mu = valid.col(c).mean();
        f[k++] = std::sqrt((valid.col(c).array() - mu).square().sum() / n);
    }
    Mat pos = fk_sequence(skel, valid);
    for (int j = 0; j < J; ++j) {
        double speed = 0.0;
        for (int i = 0; i + 1 < n; ++i)
            speed += (pos.row(i + 1).segment(3 * j, 3) - pos.row(i).segment(3 * j, 3)).norm();
        f[k++] = n > 1 ? speed / (n - 1) : 0.0;
    }
    double pathlen = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        double dx = valid(i + 1, 0) - valid(i, 0);
        double dz = valid(i + 1, 1) - valid(i, 1);
        pathlen += std::hypot(dx, dz);
    }
    f[k++] = pathlen;
    f[k++] = n > 1 ? (valid(n - 1, 2) - valid(0, 2)) / (n - 1) : 0.0;  // mean yaw rate
    f[k++] = std::hypot(valid(n - 1, 0) - valid(0, 0), valid(n - 1, 1) - valid(0, 1));
    return f;
}

namespace {

Mat sqrtm_psd(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

ToyFidResult toy_fid(const Mat& gen_features, const Mat& ref_features) {
    if (gen_features.rows() < 2 || ref_features.rows() < 2)
        throw InvalidInputError("toy_fid: need at least 2 clips per set");
    auto fit = [](const Mat& x, Vec& mu, Mat& cov) {
        mu = x.colwise().mean();
        Mat centered = x.rowwise() - mu.transpose();
        cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    };
    Vec mu1, mu2;
    Mat c1, c2;
    fit(gen_features, mu1, c1);
    fit(ref_features, mu2, c2);

    ToyFidResult res;
    auto min_eig = [](const Mat& c) {
        Eigen::SelfAdjointEigenSolver<Mat> es(c);
        return es.eigenvalues().minCoeff();
    };
    if (min_eig(c1) < 1e-10 || min_eig(c2) < 1e-10) {
        res.regularized = true;
        c1 += 1e-6 * Mat::Identity(c1.rows(), c1.cols());
        c2 += 1e-6 * Mat::Identity(c2.rows(), c2.cols());
    }
    Mat s1 = sqrtm_psd(c1);
    Mat cross = sqrtm_psd(s1 * c2 * s1);
    double trace_term = c1.trace() + c2.trace() - 2.0 * cross.trace();
    res.value = (mu1 - mu2).squaredNorm() + std::max(trace_term, 0.0);
    return res;
}

LabelClassifier LabelClassifier::train(const Mat& features, const std::vector<int>& labels,
                                       int n_labels, Rng& rng, int hidden, int epochs,
                                       double lr) {
    if (features.rows() != static_cast<int>(labels.size()) || features.rows() == 0)
        throw InvalidInputError("classifier: features/labels mismatch");
    const int F = static_cast<int>(features.cols());
    LabelClassifier clf;
    clf.feat_mean_ = features.colwise().mean();
    Mat centered = features.rowwise() - clf.feat_mean_.transpose();
    clf.feat_std_ =
        (centered.array().square().colwise().sum() / features.rows()).sqrt().matrix();
    for (int i = 0; i < F; ++i)
        if (clf.feat_std_[i] < 1e-8) clf.feat_std_[i] = 1.0;
    Mat x = centered.array().rowwise() / clf.feat_std_.transpose().array();

    clf.w1_ = rng.normal_mat(F, hidden) / std::sqrt(static_cast<double>(F));
    clf.b1_ = Mat::Zero(1, hidden);
    clf.w2_ = rng.normal_mat(hidden, n_labels) / std::sqrt(static_cast<double>(hidden));
    clf.b2_ = Mat::Zero(1, n_labels);

    nn::AdamW opt({&clf.w1_, &clf.b1_, &clf.w2_, &clf.b2_}, {.lr = lr});
    std::vector<uint8_t> all_cols(n_labels, 1);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        nn::Tape t;
        nn::Var xw = t.leaf(x);
        nn::Var w1 = t.leaf(clf.w1_, true), b1 = t.leaf(clf.b1_, true);
        nn::Var w2 = t.leaf(clf.w2_, true), b2 = t.leaf(clf.b2_, true);
        nn::Var h = t.silu(t.add_rowvec(t.matmul(xw, w1), b1));
        nn::Var logits = t.add_rowvec(t.matmul(h, w2), b2);
        nn::Var probs = t.softmax_rows(logits, all_cols);
        // cross entropy via custom grad: d(logits) = probs - onehot
        const Mat& p = t.val(probs);
        Mat grad_logits = p;
        double loss = 0.0;
        for (int r = 0; r < p.rows(); ++r) {
            loss -= std::log(std::max(p(r, labels[r]), 1e-12));
            grad_logits(r, labels[r]) -= 1.0;
        }
        grad_logits /= p.rows();
        nn::Var lv = t.custom(Mat::Constant(1, 1, loss / p.rows()), {logits},
                              [logits, grad_logits](nn::Tape& tt, const Mat& g) {
                                  tt.accum_grad(logits, g(0, 0) * grad_logits);
                              });
        t.backward(lv);
        opt.step({t.grad(w1), t.grad(b1), t.grad(w2), t.grad(b2)});
    }
    return clf;
}

int LabelClassifier::predict(const Vec& feature) const {
    Vec x = (feature - feat_mean_).cwiseQuotient(feat_std_);
    Vec h = (x.transpose() * w1_ + b1_).transpose();
    for (int i = 0; i < h.size(); ++i) h[i] = h[i] / (1.0 + std::exp(-h[i]));
    Vec logits = (h.transpose() * w2_ + b2_).transpose();
    int best = 0;
    logits.maxCoeff(&best);
    return best;
}

double LabelClassifier::accuracy(const Mat& features, const std::vector<int>& labels) const {
    int correct = 0;
    for (int r = 0; r < features.rows(); ++r)
        if (predict(features.row(r).transpose()) == labels[r]) ++correct;
    return features.rows() > 0 ? static_cast<double>(correct) / features.rows() : 0.0;
}

namespace {

void put_mat_f(std::ostream& os, const Mat& m) {
    uint32_t r = static_cast<uint32_t>(m.rows()), c = static_cast<uint32_t>(m.cols());
    os.write(reinterpret_cast<const char*>(&r), 4);
    os.write(reinterpret_cast<const char*>(&c), 4);
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat get_mat_f(std::istream& is) {
    uint32_t r = 0, c = 0;
    is.read(reinterpret_cast<char*>(&r), 4);
    is.read(reinterpret_cast<char*>(&c), 4);
    Mat m(r, c);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) throw DataError("classifier file truncated");
    return m;
}

}  // namespace

void LabelClassifier::save(const std::filesystem::path& path) const {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os.write("SACL", 4);
    put_mat_f(os, feat_mean_.transpose());
    put_mat_f(os, feat_std_.transpose());
    put_mat_f(os, w1_);
    put_mat_f(os, b1_);
    put_mat_f(os, w2_);
    put_mat_f(os, b2_);
}

LabelClassifier LabelClassifier::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open classifier: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "SACL")
        throw DataError("not a classifier file: " + path.string());
    LabelClassifier clf;
    clf.feat_mean_ = get_mat_f(is).transpose();
    clf.feat_std_ = get_mat_f(is).transpose();
    clf.w1_ = get_mat_f(is);
    clf.b1_ = get_mat_f(is);
    clf.w2_ = get_mat_f(is);
    clf.b2_ = get_mat_f(is);
    return clf;
}

}  // namespace sama
