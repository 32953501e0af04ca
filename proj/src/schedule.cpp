#include "sama/schedule.hpp"

#include <cmath>

namespace sama {

NoiseSchedule NoiseSchedule::cosine(int timesteps, double s) {
    if (timesteps < 1) throw ConfigError("schedule: timesteps must be >= 1");
    NoiseSchedule out;
    out.timesteps = timesteps;
    out.beta.assign(timesteps + 1, 0.0);
    out.alpha_bar.assign(timesteps + 1, 1.0);
    auto f = [&](double t) {
        double v = std::cos((t / timesteps + s) / (1.0 + s) * kPi / 2.0);
        return v * v;
    };
    double f0 = f(0.0);
    for (int t = 1; t <= timesteps; ++t) {
        out.alpha_bar[t] = f(static_cast<double>(t)) / f0;
        double b = 1.0 - out.alpha_bar[t] / out.alpha_bar[t - 1];
        b = std::min(b, 0.999);
        out.beta[t] = b;
        out.alpha_bar[t] = out.alpha_bar[t - 1] * (1.0 - b);
    }
    out.validate();
    return out;
}

void NoiseSchedule::validate() const {
    if (std::abs(alpha_bar[0] - 1.0) > 1e-12)
        throw ConfigError("schedule: alpha_bar[0] must be 1");
    for (int t = 1; t <= timesteps; ++t) {
        if (!(beta[t] > 0.0 && beta[t] < 1.0))
            throw ConfigError("schedule: beta out of (0,1) at t=" + std::to_string(t));
        if (!(alpha_bar[t] < alpha_bar[t - 1]))
            throw ConfigError("schedule: alpha_bar not strictly decreasing at t=" +
                              std::to_string(t));
    }
}

NoiseSchedule::Posterior NoiseSchedule::posterior(int t) const {
    if (t < 1 || t > timesteps) throw InvalidInputError("posterior: t out of range");
    double ab_t = alpha_bar[t];
    double ab_prev = alpha_bar[t - 1];
    double alpha_t = 1.0 - beta[t];
    Posterior p;
    p.coef_x0 = std::sqrt(ab_prev) * beta[t] / (1.0 - ab_t);
    p.coef_xt = std::sqrt(alpha_t) * (1.0 - ab_prev) / (1.0 - ab_t);
    double var = (1.0 - ab_prev) / (1.0 - ab_t) * beta[t];
    p.sigma = t > 1 ? std::sqrt(var) : 0.0;
    return p;
}

Mat forward_noise(const Mat& x0, int valid_len, int t, const NoiseSchedule& sched, Rng& rng) {
    if (t < 0 || t > sched.timesteps)
        throw InvalidInputError("forward_noise: t=" + std::to_string(t) + " out of [0, " +
                                std::to_string(sched.timesteps) + "]");
    Mat xt = Mat::Zero(x0.rows(), x0.cols());
    double a = sched.sqrt_ab(t);
    double b = sched.sqrt_one_minus_ab(t);
    if (t == 0) {
        xt.topRows(valid_len) = x0.topRows(valid_len);
        return xt;
    }
    for (int r = 0; r < valid_len; ++r)
        for (int c = 0; c < x0.cols(); ++c) xt(r, c) = a * x0(r, c) + b * rng.normal();
    return xt;
}

}  // namespace sama
