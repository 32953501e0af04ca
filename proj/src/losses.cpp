#include "sama/losses.hpp"

namespace sama {

double loss_t2m(const Mat& x0, const Mat& xhat, int valid_len) {
    if (x0.rows() != xhat.rows() || x0.cols() != xhat.cols())
        throw InvalidInputError("loss_t2m: shape mismatch");
    double n = static_cast<double>(valid_len) * x0.cols();
    return (xhat.topRows(valid_len) - x0.topRows(valid_len)).array().square().sum() / n;
}

double loss_joints(const Skeleton& skel, const Mat& x0, const Mat& xhat, int valid_len) {
    Mat p0 = fk_sequence(skel, x0.topRows(valid_len));
    Mat ph = fk_sequence(skel, xhat.topRows(valid_len));
    double n = static_cast<double>(valid_len) * skel.joint_count();
    return (ph - p0).array().square().sum() / n;
}

double loss_vel(const Skeleton& skel, const Mat& x0, const Mat& xhat, int valid_len) {
    if (valid_len < 2) return 0.0;
    Mat v0 = temporal_diff(fk_sequence(skel, x0.topRows(valid_len)));
    Mat vh = temporal_diff(fk_sequence(skel, xhat.topRows(valid_len)));
    double n = static_cast<double>(valid_len - 1) * skel.joint_count();
    return (vh - v0).array().square().sum() / n;
}

LossGrad total_loss_with_grad(const Skeleton& skel, const Mat& x0, const Mat& xhat,
                              int valid_len, double lambda_joints, double lambda_vel) {
    if (x0.rows() != xhat.rows() || x0.cols() != xhat.cols())
        throw InvalidInputError("total_loss_with_grad: shape mismatch");
    const int J = skel.joint_count();
    const int D = skel.pose_dim();
    const int n = valid_len;

    LossGrad out;
    out.grad = Mat::Zero(xhat.rows(), xhat.cols());

    // t2m term
    double n_t2m = static_cast<double>(n) * x0.cols();
    Mat diff = xhat.topRows(n) - x0.topRows(n);
    out.parts.t2m = diff.array().square().sum() / n_t2m;
    out.grad.topRows(n) += (2.0 / n_t2m) * diff;

    // FK positions and the per-frame position error
    Mat p0 = fk_sequence(skel, x0.topRows(n));
    Mat ph = fk_sequence(skel, xhat.topRows(n));
    Mat perr = ph - p0;  // n x 3J
    double n_j = static_cast<double>(n) * J;
    out.parts.joints = perr.array().square().sum() / n_j;

    // velocity error (temporal difference of positions)
    Mat verr;
    double n_v = 0.0;
    if (n >= 2) {
        verr = temporal_diff(ph) - temporal_diff(p0);
        n_v = static_cast<double>(n - 1) * J;
        out.parts.vel = verr.array().square().sum() / n_v;
    }

    // dL/d(positions), then chain through the FK Jacobian per frame
    Mat dpos = (2.0 * lambda_joints / n_j) * perr;
    if (n >= 2) {
        double cv = 2.0 * lambda_vel / n_v;
        for (int i = 0; i < n - 1; ++i) {
            dpos.row(i) -= cv * verr.row(i);
            dpos.row(i + 1) += cv * verr.row(i);
        }
    }
    for (int i = 0; i < n; ++i) {
        Mat jac = fk_jacobian(skel, xhat.row(i).transpose());  // 3J x D
        out.grad.row(i) += dpos.row(i) * jac;
    }

    out.value = out.parts.total(lambda_joints, lambda_vel);
    (void)D;
    return out;
}

nn::Var geometric_loss_op(nn::Tape& tape, nn::Var xhat_norm, const Mat& x0_raw,
                          const Skeleton& skel, const NormStats& norm, int valid_len,
                          double lambda_joints, double lambda_vel, LossBreakdown* breakdown) {
    const Mat& xn = tape.val(xhat_norm);
    Mat xhat_raw = norm.denormalize(xn, valid_len);

    const int J = skel.joint_count();
    const int n = valid_len;
    Mat p0 = fk_sequence(skel, x0_raw.topRows(n));
    Mat ph = fk_sequence(skel, xhat_raw.topRows(n));
    Mat perr = ph - p0;
    double n_j = static_cast<double>(n) * J;
    double l_joints = perr.array().square().sum() / n_j;

    Mat verr;
    double n_v = 0.0, l_vel = 0.0;
    if (n >= 2) {
        verr = temporal_diff(ph) - temporal_diff(p0);
        n_v = static_cast<double>(n - 1) * J;
        l_vel = verr.array().square().sum() / n_v;
    }
    if (breakdown) {
        breakdown->joints = l_joints;
        breakdown->vel = l_vel;
    }

    Mat value(1, 1);
    value(0, 0) = lambda_joints * l_joints + lambda_vel * l_vel;

    Mat dpos = (2.0 * lambda_joints / n_j) * perr;
    if (n >= 2) {
        double cv = 2.0 * lambda_vel / n_v;
        for (int i = 0; i < n - 1; ++i) {
            dpos.row(i) -= cv * verr.row(i);
            dpos.row(i + 1) += cv * verr.row(i);
        }
    }
    Mat grad_norm = Mat::Zero(xn.rows(), xn.cols());
    for (int i = 0; i < n; ++i) {
        Mat jac = fk_jacobian(skel, xhat_raw.row(i).transpose());
        // raw = normed .* std + mean, so the chain rule scales by std
        grad_norm.row(i) = (dpos.row(i) * jac).cwiseProduct(norm.stddev.transpose());
    }

    return tape.custom(std::move(value), {xhat_norm},
                       [xhat_norm, grad_norm](nn::Tape& t, const Mat& g) {
                           t.accum_grad(xhat_norm, g(0, 0) * grad_norm);
                       });
}

}  // namespace sama
