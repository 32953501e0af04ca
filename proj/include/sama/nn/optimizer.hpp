#pragma once

#include <vector>

#include "sama/common.hpp"

namespace sama::nn {

// AdamW over a fixed, ordered list of parameter matrices. The parameter
// order is established once at construction and must match the gradient
// order handed to step().
class AdamW {
public:
    struct Options {
        double lr = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.0;
    };

    AdamW(std::vector<Mat*> params, Options opt) : params_(std::move(params)), opt_(opt) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (Mat* p : params_) {
            m_.push_back(Mat::Zero(p->rows(), p->cols()));
            v_.push_back(Mat::Zero(p->rows(), p->cols()));
        }
    }

    // grads[i] pairs with params[i]; empty matrices are skipped
    void step(const std::vector<Mat>& grads) {
        ++t_;
        double bc1 = 1.0 - std::pow(opt_.beta1, t_);
        double bc2 = 1.0 - std::pow(opt_.beta2, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            if (grads[i].size() == 0) continue;
            Mat& p = *params_[i];
            m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * grads[i];
            v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grads[i].array().square().matrix();
            Mat mhat = m_[i] / bc1;
            Mat vhat = v_[i] / bc2;
            if (opt_.weight_decay > 0.0) p -= opt_.lr * opt_.weight_decay * p;
            p -= opt_.lr * (mhat.array() / (vhat.array().sqrt() + opt_.eps)).matrix();
        }
    }

    int64_t steps_taken() const { return t_; }

private:
    std::vector<Mat*> params_;
    Options opt_;
    std::vector<Mat> m_, v_;
    int64_t t_ = 0;
};

// Global-norm gradient clipping; returns the pre-clip norm.
inline double clip_grad_norm(std::vector<Mat>& grads, double max_norm) {
    double sq = 0.0;
    for (const Mat& g : grads) sq += g.array().square().sum();
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (Mat& g : grads) g *= s;
    }
    return norm;
}

}  // namespace sama::nn
