#include "sama/nn/tape.hpp"

#include <cmath>
#include <limits>

namespace sama::nn {

Var Tape::push(Mat value, bool rg, std::function<void(Tape&, const Mat&)> back) {
    Node n;
    n.val = std::move(value);
    n.rg = rg;
    if (rg) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accum(int id, const Mat& g) {
    Node& n = nodes_[id];
    if (!n.rg) return;
    if (n.grad.size() == 0)
        n.grad = g;
    else
        n.grad += g;
}

Var Tape::leaf(Mat value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
    Mat out = val(a) * val(b);
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g * t.val(b).transpose());
        if (t.requires_grad(b)) t.accum(b.id, t.val(a).transpose() * g);
    });
}

Var Tape::matmul_nt(Var a, Var b) {
    Mat out = val(a) * val(b).transpose();
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g * t.val(b));
        if (t.requires_grad(b)) t.accum(b.id, g.transpose() * t.val(a));
    });
}

Var Tape::add(Var a, Var b) {
    Mat out = val(a) + val(b);
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g);
        if (t.requires_grad(b)) t.accum(b.id, g);
    });
}

Var Tape::sub(Var a, Var b) {
    Mat out = val(a) - val(b);
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g);
        if (t.requires_grad(b)) t.accum(b.id, -g);
    });
}

Var Tape::add_rowvec(Var a, Var b) {
    Mat out = val(a).rowwise() + val(b).row(0);
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g);
        if (t.requires_grad(b)) t.accum(b.id, g.colwise().sum());
    });
}

Var Tape::mul(Var a, Var b) {
    Mat out = val(a).cwiseProduct(val(b));
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) t.accum(a.id, g.cwiseProduct(t.val(b)));
        if (t.requires_grad(b)) t.accum(b.id, g.cwiseProduct(t.val(a)));
    });
}

Var Tape::scale(Var a, double s) {
    Mat out = s * val(a);
    return push(std::move(out), requires_grad(a), [a, s](Tape& t, const Mat& g) {
        t.accum(a.id, s * g);
    });
}

Var Tape::add_const(Var a, const Mat& c) {
    Mat out = val(a) + c;
    return push(std::move(out), requires_grad(a), [a](Tape& t, const Mat& g) {
        t.accum(a.id, g);
    });
}

Var Tape::mul_const(Var a, const Mat& c) {
    Mat out = val(a).cwiseProduct(c);
    Mat cc = c;
    return push(std::move(out), requires_grad(a), [a, cc](Tape& t, const Mat& g) {
        t.accum(a.id, g.cwiseProduct(cc));
    });
}

Var Tape::silu(Var a) {
    const Mat& x = val(a);
    Mat sig = (1.0 + (-x.array()).exp()).inverse();
    Mat out = x.cwiseProduct(sig);
    Mat sigc = sig;
    return push(std::move(out), requires_grad(a), [a, sigc](Tape& t, const Mat& g) {
        const Mat& x = t.val(a);
        Mat d = sigc.array() * (1.0 + x.array() * (1.0 - sigc.array()));
        t.accum(a.id, g.cwiseProduct(d));
    });
}

Var Tape::square(Var a) {
    Mat out = val(a).array().square();
    return push(std::move(out), requires_grad(a), [a](Tape& t, const Mat& g) {
        t.accum(a.id, 2.0 * g.cwiseProduct(t.val(a)));
    });
}

Var Tape::slice_cols(Var a, int c0, int n) {
    Mat out = val(a).middleCols(c0, n);
    int cols = static_cast<int>(val(a).cols());
    return push(std::move(out), requires_grad(a), [a, c0, n, cols](Tape& t, const Mat& g) {
        Mat full = Mat::Zero(g.rows(), cols);
        full.middleCols(c0, n) = g;
        t.accum(a.id, full);
    });
}

Var Tape::slice_rows(Var a, int r0, int n) {
    Mat out = val(a).middleRows(r0, n);
    int rows = static_cast<int>(val(a).rows());
    return push(std::move(out), requires_grad(a), [a, r0, n, rows](Tape& t, const Mat& g) {
        Mat full = Mat::Zero(rows, g.cols());
        full.middleRows(r0, n) = g;
        t.accum(a.id, full);
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    int rows = static_cast<int>(val(parts[0]).rows());
    int cols = 0;
    bool rg = false;
    for (Var p : parts) {
        cols += static_cast<int>(val(p).cols());
        rg = rg || requires_grad(p);
    }
    Mat out(rows, cols);
    int c = 0;
    for (Var p : parts) {
        out.middleCols(c, val(p).cols()) = val(p);
        c += static_cast<int>(val(p).cols());
    }
    auto ps = parts;
    return push(std::move(out), rg, [ps](Tape& t, const Mat& g) {
        int c = 0;
        for (Var p : ps) {
            int n = static_cast<int>(t.val(p).cols());
            if (t.requires_grad(p)) t.accum(p.id, g.middleCols(c, n));
            c += n;
        }
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    int cols = static_cast<int>(val(parts[0]).cols());
    int rows = 0;
    bool rg = false;
    for (Var p : parts) {
        rows += static_cast<int>(val(p).rows());
        rg = rg || requires_grad(p);
    }
    Mat out(rows, cols);
    int r = 0;
    for (Var p : parts) {
        out.middleRows(r, val(p).rows()) = val(p);
        r += static_cast<int>(val(p).rows());
    }
    auto ps = parts;
    return push(std::move(out), rg, [ps](Tape& t, const Mat& g) {
        int r = 0;
        for (Var p : ps) {
            int n = static_cast<int>(t.val(p).rows());
            if (t.requires_grad(p)) t.accum(p.id, g.middleRows(r, n));
            r += n;
        }
    });
}

Var Tape::repeat_row(Var a, int n) {
    Mat out = val(a).row(0).replicate(n, 1);
    return push(std::move(out), requires_grad(a), [a](Tape& t, const Mat& g) {
        t.accum(a.id, g.colwise().sum());
    });
}

Var Tape::softmax_rows(Var a, const std::vector<uint8_t>& col_active) {
    const Mat& x = val(a);
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < x.cols(); ++c)
            if (col_active[c]) mx = std::max(mx, x(r, c));
        if (!std::isfinite(mx)) continue;  // no active keys: row stays zero
        double sum = 0.0;
        for (int c = 0; c < x.cols(); ++c) {
            if (!col_active[c]) continue;
            double e = std::exp(x(r, c) - mx);
            out(r, c) = e;
            sum += e;
        }
        for (int c = 0; c < x.cols(); ++c) out(r, c) /= sum;
    }
    Mat y = out;
    return push(std::move(out), requires_grad(a), [a, y](Tape& t, const Mat& g) {
        // dx = y .* (g - rowsum(g .* y)); inactive columns have y == 0
        Vec rowsum = g.cwiseProduct(y).rowwise().sum();
        Mat dx(g.rows(), g.cols());
        for (int r = 0; r < g.rows(); ++r)
            dx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - rowsum[r]).matrix());
        t.accum(a.id, dx);
    });
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
    const Mat& x = val(a);
    int n = static_cast<int>(x.cols());
    Mat xhat(x.rows(), n);
    Vec inv_sigma(x.rows());
    for (int r = 0; r < x.rows(); ++r) {
        double mu = x.row(r).mean();
        double var = (x.row(r).array() - mu).square().sum() / n;
        double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[r] = is;
        xhat.row(r) = (x.row(r).array() - mu) * is;
    }
    Mat out = (xhat.array().rowwise() * val(gain).row(0).array()).rowwise() +
              val(bias).row(0).array();
    bool rg = requires_grad(a) || requires_grad(gain) || requires_grad(bias);
    Mat xh = xhat;
    Vec isv = inv_sigma;
    return push(std::move(out), rg, [a, gain, bias, xh, isv, n](Tape& t, const Mat& g) {
        if (t.requires_grad(gain)) t.accum(gain.id, g.cwiseProduct(xh).colwise().sum());
        if (t.requires_grad(bias)) t.accum(bias.id, g.colwise().sum());
        if (t.requires_grad(a)) {
            Mat gg = g.array().rowwise() * t.val(gain).row(0).array();  // dL/dxhat
            Mat da(g.rows(), n);
            for (int r = 0; r < g.rows(); ++r) {
                double m1 = gg.row(r).mean();
                double m2 = gg.row(r).cwiseProduct(xh.row(r)).mean();
                da.row(r) = (gg.row(r).array() - m1 - xh.row(r).array() * m2) * isv[r];
            }
            t.accum(a.id, da);
        }
    });
}

Var Tape::blend_rows(Var a, Var b, const std::vector<uint8_t>& row_mask) {
    Mat out = val(a);
    for (int r = 0; r < out.rows(); ++r)
        if (row_mask[r]) out.row(r) = val(b).row(r);
    auto mask = row_mask;
    bool rg = requires_grad(a) || requires_grad(b);
    return push(std::move(out), rg, [a, b, mask](Tape& t, const Mat& g) {
        if (t.requires_grad(a)) {
            Mat ga = g;
            for (int r = 0; r < ga.rows(); ++r)
                if (mask[r]) ga.row(r).setZero();
            t.accum(a.id, ga);
        }
        if (t.requires_grad(b)) {
            Mat gb = Mat::Zero(g.rows(), g.cols());
            for (int r = 0; r < gb.rows(); ++r)
                if (mask[r]) gb.row(r) = g.row(r);
            t.accum(b.id, gb);
        }
    });
}

Var Tape::mask_rows(Var a, const std::vector<uint8_t>& row_mask) {
    Mat out = val(a);
    for (int r = 0; r < out.rows(); ++r)
        if (!row_mask[r]) out.row(r).setZero();
    auto mask = row_mask;
    return push(std::move(out), requires_grad(a), [a, mask](Tape& t, const Mat& g) {
        Mat ga = g;
        for (int r = 0; r < ga.rows(); ++r)
            if (!mask[r]) ga.row(r).setZero();
        t.accum(a.id, ga);
    });
}

Var Tape::mean_all(Var a) {
    double n = static_cast<double>(val(a).size());
    Mat out(1, 1);
    out(0, 0) = val(a).mean();
    return push(std::move(out), requires_grad(a), [a, n](Tape& t, const Mat& g) {
        t.accum(a.id, Mat::Constant(t.val(a).rows(), t.val(a).cols(), g(0, 0) / n));
    });
}

Var Tape::sum_all(Var a) {
    Mat out(1, 1);
    out(0, 0) = val(a).sum();
    return push(std::move(out), requires_grad(a), [a](Tape& t, const Mat& g) {
        t.accum(a.id, Mat::Constant(t.val(a).rows(), t.val(a).cols(), g(0, 0)));
    });
}

Var Tape::mse(Var a, const Mat& target, int valid_rows) {
    const Mat& x = val(a);
    double n = static_cast<double>(valid_rows) * x.cols();
    Mat diff = x.topRows(valid_rows) - target.topRows(valid_rows);
    Mat out(1, 1);
    out(0, 0) = diff.array().square().sum() / n;
    Mat d = diff;
    return push(std::move(out), requires_grad(a), [a, d, n, valid_rows](Tape& t, const Mat& g) {
        Mat ga = Mat::Zero(t.val(a).rows(), t.val(a).cols());
        ga.topRows(valid_rows) = (2.0 / n) * g(0, 0) * d;
        t.accum(a.id, ga);
    });
}

Var Tape::custom(Mat value, const std::vector<Var>& parents,
                 std::function<void(Tape&, const Mat&)> backward) {
    bool rg = false;
    for (Var p : parents) rg = rg || requires_grad(p);
    return push(std::move(value), rg, std::move(backward));
}

void Tape::backward(Var loss) {
    Node& top = nodes_[loss.id];
    if (top.val.size() != 1) throw InvalidInputError("backward: loss must be scalar");
    top.grad = Mat::Ones(1, 1);
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.rg || !n.back || n.grad.size() == 0) continue;
        n.back(*this, n.grad);
    }
}

}  // namespace sama::nn
