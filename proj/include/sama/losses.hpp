#pragma once

#include "sama/common.hpp"
#include "sama/model.hpp"
#include "sama/nn/tape.hpp"
#include "sama/skeleton.hpp"

namespace sama {

// Reconstruction loss: mean over valid frames and channels of the squared
// per-channel difference.
double loss_t2m(const Mat& x0, const Mat& xhat, int valid_len);

// Geometric losses in raw motion space. loss_joints averages the squared
// Euclidean error of FK joint positions over (frames x joints); loss_vel
// does the same for the temporal difference of the positions.
double loss_joints(const Skeleton& skel, const Mat& x0, const Mat& xhat, int valid_len);
double loss_vel(const Skeleton& skel, const Mat& x0, const Mat& xhat, int valid_len);

struct LossBreakdown {
    double t2m = 0.0;
    double joints = 0.0;
    double vel = 0.0;
    double total(double lambda_joints, double lambda_vel) const {
        return t2m + lambda_joints * joints + lambda_vel * vel;
    }
};

// Total pre-training loss and its analytic gradient w.r.t. xhat (raw space).
struct LossGrad {
    LossBreakdown parts;
    double value = 0.0;
    Mat grad;  // d(total)/d(xhat), zero on padded rows
};
LossGrad total_loss_with_grad(const Skeleton& skel, const Mat& x0, const Mat& xhat,
                              int valid_len, double lambda_joints, double lambda_vel);

// Geometric losses as a tape op on the normalized prediction: denormalizes
// internally and routes the gradient through the channel scales.
nn::Var geometric_loss_op(nn::Tape& tape, nn::Var xhat_norm, const Mat& x0_raw,
                          const Skeleton& skel, const NormStats& norm, int valid_len,
                          double lambda_joints, double lambda_vel,
                          LossBreakdown* breakdown = nullptr);

}  // namespace sama
