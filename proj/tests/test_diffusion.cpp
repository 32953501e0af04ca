#include <doctest.h>

#include "sama/model.hpp"
#include "sama/rng.hpp"
#include "sama/schedule.hpp"

using namespace sama;

TEST_CASE("cosine schedule invariants") {
    for (int T : {10, 64, 100, 500}) {
        NoiseSchedule s = NoiseSchedule::cosine(T);
        CHECK(s.alpha_bar[0] == 1.0);
        for (int t = 1; t <= T; ++t) {
            CHECK(s.beta[t] > 0.0);
            CHECK(s.beta[t] < 1.0);
            CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
        }
        CHECK(s.alpha_bar[T] < 0.05);
    }
}

TEST_CASE("forward_noise t=0 returns x0 exactly") {
    NoiseSchedule s = NoiseSchedule::cosine(50);
    Rng rng(3);
    Mat x0 = rng.normal_mat(6, 4);
    Mat xt = forward_noise(x0, 6, 0, s, rng);
    CHECK((xt - x0).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(forward_noise(x0, 6, 51, s, rng), InvalidInputError);
    CHECK_THROWS_AS(forward_noise(x0, 6, -1, s, rng), InvalidInputError);
}

TEST_CASE("forward_noise marginal moments at t=T") {
    NoiseSchedule s = NoiseSchedule::cosine(64);
    Rng rng(8);
    const int draws = 10000;
    double x0v = 1.3;
    Mat x0 = Mat::Constant(1, 1, x0v);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        double v = forward_noise(x0, 1, 64, s, rng)(0, 0);
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / draws;
    double sd = std::sqrt(sum2 / draws - mean * mean);
    double expect_mean = s.sqrt_ab(64) * x0v;
    double expect_sd = s.sqrt_one_minus_ab(64);
    double se_mean = expect_sd / std::sqrt(double(draws));
    double se_sd = expect_sd / std::sqrt(2.0 * draws);
    CHECK(std::abs(mean - expect_mean) < 3 * se_mean);
    CHECK(std::abs(sd - expect_sd) < 3 * se_sd);
}

TEST_CASE("iterated single-step noising matches the closed-form marginal") {
    NoiseSchedule s = NoiseSchedule::cosine(32);
    Rng rng(15);
    const int trials = 1000;
    const int t_target = 20;
    double x0v = -0.7;
    double sum_it = 0.0, sum2_it = 0.0, sum_cf = 0.0, sum2_cf = 0.0;
    for (int i = 0; i < trials; ++i) {
        double x = x0v;
        for (int t = 1; t <= t_target; ++t)
            x = std::sqrt(1.0 - s.beta[t]) * x + std::sqrt(s.beta[t]) * rng.normal();
        sum_it += x;
        sum2_it += x * x;
        Mat x0 = Mat::Constant(1, 1, x0v);
        double y = forward_noise(x0, 1, t_target, s, rng)(0, 0);
        sum_cf += y;
        sum2_cf += y * y;
    }
    double m_it = sum_it / trials, m_cf = sum_cf / trials;
    double sd_it = std::sqrt(sum2_it / trials - m_it * m_it);
    double sd_cf = std::sqrt(sum2_cf / trials - m_cf * m_cf);
    double sigma = s.sqrt_one_minus_ab(t_target);
    double se_mean = sigma / std::sqrt(double(trials));
    CHECK(std::abs(m_it - m_cf) < 4 * se_mean * std::sqrt(2.0));
    CHECK(std::abs(sd_it - sd_cf) < 4 * sigma / std::sqrt(2.0 * trials) * std::sqrt(2.0));
}

namespace {

ModelState tiny_model(Rng& rng, int T = 8) {
    ModelConfig cfg;
    cfg.pose_dim = 16;
    cfg.latent_dim = 32;
    cfg.blocks = 2;
    cfg.heads = 4;
    cfg.ffn_dim = 64;
    cfg.cakey_hidden = 32;
    cfg.vit_dim = 32;
    cfg.vit_layers = 2;
    cfg.patch_size = 3;
    cfg.vol_dims = Vec3i(6, 6, 6);
    NoiseSchedule sched = NoiseSchedule::cosine(T);
    ModelState s = init_backbone(cfg, sched, rng);
    s.norm.mean = Vec::Zero(cfg.pose_dim);
    s.norm.stddev = Vec::Ones(cfg.pose_dim);
    return s;
}

}  // namespace

TEST_CASE("denoise_predict is deterministic and finite") {
    Rng rng(70);
    ModelState s = tiny_model(rng);
    Mat xt = rng.normal_mat(12, 16);
    Condition cond;
    cond.label = 2;
    cond.valid_length = 12;
    Mat a = denoise_predict(s, xt, 3, cond);
    Mat b = denoise_predict(s, xt, 3, cond);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.allFinite());
    CHECK(a.rows() == 12);
    CHECK(a.cols() == 16);

    Mat zero = Mat::Zero(12, 16);
    Mat z = denoise_predict(s, zero, 1, cond);
    CHECK(z.allFinite());
}

TEST_CASE("padded tail content does not affect valid frames") {
    Rng rng(71);
    ModelState s = tiny_model(rng);
    int N = 14, valid = 9;
    Mat xt = rng.normal_mat(N, 16);
    Condition cond;
    cond.label = 1;
    cond.valid_length = valid;
    Mat base = denoise_predict(s, xt, 2, cond);

    Mat xt2 = xt;
    for (int r = valid; r < N; ++r) xt2.row(r) = rng.normal_mat(1, 16);
    Mat perturbed = denoise_predict(s, xt2, 2, cond);
    CHECK((base.topRows(valid) - perturbed.topRows(valid)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("denoise_predict validates conditions") {
    Rng rng(72);
    ModelState s = tiny_model(rng);
    Mat xt = rng.normal_mat(8, 16);
    Condition cond;
    cond.valid_length = 8;
    cond.label = 99;
    CHECK_THROWS_AS(denoise_predict(s, xt, 1, cond), InvalidInputError);
    cond.label.reset();
    KeyframeMask m = KeyframeMask::endpoints(5);  // wrong length
    cond.mask = &m;
    CHECK_THROWS_AS(denoise_predict(s, xt, 1, cond), InvalidInputError);
    cond.mask = nullptr;
    VoxelGrid g;
    cond.scene_grid = &g;
    CHECK_THROWS_AS(denoise_predict(s, xt, 1, cond), InvalidInputError);
}

TEST_CASE("label embedding and null text produce different outputs") {
    Rng rng(73);
    ModelState s = tiny_model(rng);
    Mat xt = rng.normal_mat(10, 16);
    Condition with_label;
    with_label.label = 4;
    with_label.valid_length = 10;
    Condition null_text;
    null_text.valid_length = 10;
    Mat a = denoise_predict(s, xt, 2, with_label);
    Mat b = denoise_predict(s, xt, 2, null_text);
    CHECK((a - b).cwiseAbs().maxCoeff() > 1e-8);
}
