#pragma once

#include <vector>

#include "sama/common.hpp"
#include "sama/motion.hpp"
#include "sama/rng.hpp"

namespace sama {

// Cosine alpha-bar schedule. Index convention: t in [0, T], alpha_bar[0] = 1
// (t = 0 is the clean sample); betas[t] covers the step t-1 -> t.
struct NoiseSchedule {
    int timesteps = 0;
    std::vector<double> beta;       // size T+1, beta[0] unused (= 0)
    std::vector<double> alpha_bar;  // size T+1, strictly decreasing, alpha_bar[0] = 1

    static NoiseSchedule cosine(int timesteps, double s = 0.008);

    double sqrt_ab(int t) const { return std::sqrt(alpha_bar[t]); }
    double sqrt_one_minus_ab(int t) const { return std::sqrt(1.0 - alpha_bar[t]); }

    // DDPM posterior q(x_{t-1} | x_t, x0) coefficients and variance
    struct Posterior {
        double coef_x0;
        double coef_xt;
        double sigma;
    };
    Posterior posterior(int t) const;

    void validate() const;
};

// x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps over the valid frames; padded
// rows stay zero. t = 0 returns x0 exactly.
Mat forward_noise(const Mat& x0, int valid_len, int t, const NoiseSchedule& sched, Rng& rng);

}  // namespace sama
