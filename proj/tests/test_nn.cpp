#include <doctest.h>

#include "sama/losses.hpp"
#include "sama/model.hpp"
#include "sama/nn/optimizer.hpp"
#include "sama/nn/tape.hpp"
#include "sama/rng.hpp"

using namespace sama;
using nn::Tape;
using nn::Var;

namespace {

// central finite differences of a scalar-valued tape program w.r.t. one leaf
double max_rel_err_fd(const std::function<double(const Mat&)>& f, const Mat& x0, const Mat& grad,
                      double eps = 1e-6) {
    double max_rel = 0.0;
    for (int r = 0; r < x0.rows(); ++r)
        for (int c = 0; c < x0.cols(); ++c) {
            Mat xp = x0, xm = x0;
            xp(r, c) += eps;
            xm(r, c) -= eps;
            double fd = (f(xp) - f(xm)) / (2 * eps);
            double an = grad(r, c);
            double denom = std::max(1.0, std::max(std::abs(fd), std::abs(an)));
            max_rel = std::max(max_rel, std::abs(fd - an) / denom);
        }
    return max_rel;
}

}  // namespace

TEST_CASE("tape gradients match finite differences across ops") {
    Rng rng(99);
    Mat x0 = rng.normal_mat(5, 6);
    Mat w = rng.normal_mat(6, 4);
    Mat b = rng.normal_mat(1, 4);
    Mat gain = Mat::Ones(1, 6) + 0.1 * rng.normal_mat(1, 6);
    Mat bias = 0.1 * rng.normal_mat(1, 6);
    std::vector<uint8_t> colmask{1, 1, 0, 1, 1, 1};
    std::vector<uint8_t> rowmask{1, 0, 1, 0, 1};

    auto program = [&](Tape& t, Var x) {
        Var ln = t.layer_norm(x, t.leaf(gain), t.leaf(bias));
        Var sm = t.softmax_rows(ln, colmask);
        Var bl = t.blend_rows(x, t.silu(sm), rowmask);
        Var li = t.add_rowvec(t.matmul(bl, t.leaf(w)), t.leaf(b));
        Var sq = t.square(t.scale(li, 0.7));
        return t.mean_all(sq);
    };

    Tape t;
    Var x = t.leaf(x0, true);
    Var loss = program(t, x);
    t.backward(loss);
    Mat grad = t.grad(x);

    auto eval = [&](const Mat& xv) {
        Tape tt;
        Var xx = tt.leaf(xv, false);
        // rebuild without grads; value path identical
        Var ln = tt.layer_norm(xx, tt.leaf(gain), tt.leaf(bias));
        Var sm = tt.softmax_rows(ln, colmask);
        Var bl = tt.blend_rows(xx, tt.silu(sm), rowmask);
        Var li = tt.add_rowvec(tt.matmul(bl, tt.leaf(w)), tt.leaf(b));
        Var sq = tt.square(tt.scale(li, 0.7));
        return tt.val(tt.mean_all(sq))(0, 0);
    };
    CHECK(max_rel_err_fd(eval, x0, grad) < 1e-6);
}

TEST_CASE("tape parameter gradients through attention-shaped graph") {
    Rng rng(17);
    Mat x = rng.normal_mat(7, 8);
    Mat wq = rng.normal_mat(8, 8), wk = rng.normal_mat(8, 8), wv = rng.normal_mat(8, 8);
    std::vector<uint8_t> keys(7, 1);
    keys[5] = 0;

    auto run = [&](const Mat& wq_v, bool want_grad, Mat* grad_out) {
        Tape t;
        Var xx = t.leaf(x);
        Var q = t.leaf(wq_v, want_grad);
        Var scores = t.scale(t.matmul_nt(t.matmul(xx, q), t.matmul(xx, t.leaf(wk))), 0.35);
        Var att = t.softmax_rows(scores, keys);
        Var out = t.matmul(att, t.matmul(xx, t.leaf(wv)));
        Var loss = t.mean_all(t.square(out));
        if (want_grad) {
            t.backward(loss);
            *grad_out = t.grad(q);
        }
        return t.val(loss)(0, 0);
    };
    Mat grad;
    run(wq, true, &grad);
    auto eval = [&](const Mat& v) { return run(v, false, nullptr); };
    CHECK(max_rel_err_fd(eval, wq, grad) < 1e-6);
}

TEST_CASE("mse op and mean reduction") {
    Tape t;
    Mat a(3, 2), target(3, 2);
    a << 1, 2, 3, 4, 5, 6;
    target << 1, 2, 3, 4, 99, 99;  // last row ignored via valid_rows = 2
    Var va = t.leaf(a, true);
    Var m = t.mse(va, target, 2);
    CHECK(t.val(m)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("adamw takes a descent step") {
    Mat p = Mat::Ones(2, 2);
    nn::AdamW opt({&p}, {.lr = 0.1});
    std::vector<Mat> g{Mat::Ones(2, 2)};
    opt.step(g);
    CHECK(p(0, 0) < 1.0);
}

TEST_CASE("clip_grad_norm scales only above the threshold") {
    std::vector<Mat> g{Mat::Constant(2, 2, 3.0)};
    double pre = nn::clip_grad_norm(g, 1.0);
    CHECK(pre == doctest::Approx(6.0));
    double post = std::sqrt(g[0].array().square().sum());
    CHECK(post == doctest::Approx(1.0));

    std::vector<Mat> g2{Mat::Constant(1, 1, 0.5)};
    nn::clip_grad_norm(g2, 1.0);
    CHECK(g2[0](0, 0) == doctest::Approx(0.5));
}

TEST_CASE("loss operations satisfy their contracts") {
    Skeleton skel = Skeleton::default_five_joint();
    Rng rng(5);
    int n = 6, D = skel.pose_dim();
    Mat x0 = 0.3 * rng.normal_mat(n, D);
    x0.col(3).setConstant(0.95);

    CHECK(loss_t2m(x0, x0, n) == 0.0);
    Mat plus1 = x0.array() + 1.0;
    CHECK(loss_t2m(x0, plus1, n) == doctest::Approx(1.0));

    // independent elementwise oracle
    Mat other = x0 + 0.1 * rng.normal_mat(n, D);
    double acc = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < D; ++c) acc += (other(r, c) - x0(r, c)) * (other(r, c) - x0(r, c));
    CHECK(loss_t2m(x0, other, n) == doctest::Approx(acc / (n * D)));

    CHECK(loss_joints(skel, x0, x0, n) == 0.0);
    CHECK(loss_vel(skel, x0, x0, n) == 0.0);

    // constant root translation: loss_vel = 0, loss_joints = delta^2
    Mat shifted = x0;
    double delta = 0.17;
    shifted.col(0).array() += delta;
    CHECK(loss_vel(skel, x0, shifted, n) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(loss_joints(skel, x0, shifted, n) == doctest::Approx(delta * delta));
}

TEST_CASE("total stage-0 loss gradient matches finite differences") {
    Skeleton skel = Skeleton::default_five_joint();
    Rng rng(21);
    int n = 5, D = skel.pose_dim();
    for (int trial = 0; trial < 5; ++trial) {
        Mat x0 = 0.4 * rng.normal_mat(n, D);
        Mat xh = 0.4 * rng.normal_mat(n, D);
        LossGrad lg = total_loss_with_grad(skel, x0, xh, n, 1.0, 100.0);
        auto eval = [&](const Mat& v) {
            return loss_t2m(x0, v, n) + 1.0 * loss_joints(skel, x0, v, n) +
                   100.0 * loss_vel(skel, x0, v, n);
        };
        CHECK(max_rel_err_fd(eval, xh, lg.grad, 1e-6) < 1e-4);
        CHECK(lg.value == doctest::Approx(eval(xh)));
    }
}

TEST_CASE("geometric loss tape op routes gradients through normalization") {
    Skeleton skel = Skeleton::default_five_joint();
    Rng rng(33);
    int n = 4, D = skel.pose_dim();
    NormStats norm;
    norm.mean = 0.1 * rng.normal_vec(D);
    norm.stddev = Vec::Ones(D) + 0.2 * rng.normal_vec(D).cwiseAbs();
    Mat x0_raw = 0.4 * rng.normal_mat(n, D);
    Mat xh_norm = rng.normal_mat(n, D);

    Tape t;
    Var v = t.leaf(xh_norm, true);
    Var loss = geometric_loss_op(t, v, x0_raw, skel, norm, n, 1.0, 100.0);
    t.backward(loss);
    Mat grad = t.grad(v);

    auto eval = [&](const Mat& xn) {
        Mat raw = norm.denormalize(xn, n);
        return 1.0 * loss_joints(skel, x0_raw, raw, n) + 100.0 * loss_vel(skel, x0_raw, raw, n);
    };
    CHECK(max_rel_err_fd(eval, xh_norm, grad, 1e-6) < 1e-4);
}
