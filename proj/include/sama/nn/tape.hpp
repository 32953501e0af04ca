#pragma once

#include <functional>
#include <vector>

#include "sama/common.hpp"

namespace sama::nn {

// Reverse-mode autodiff over Eigen matrices. Ops append nodes to a Tape;
// backward() walks the tape in reverse. Handles are indices, so a Var is
// only meaningful together with the tape that produced it.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

class Tape {
public:
    Var leaf(Mat value, bool requires_grad = false);

    const Mat& val(Var v) const { return nodes_[v.id].val; }
    const Mat& grad(Var v) const { return nodes_[v.id].grad; }
    bool requires_grad(Var v) const { return nodes_[v.id].rg; }

    // --- elementwise / linear algebra ---
    Var matmul(Var a, Var b);        // A(m,k) * B(k,n)
    Var matmul_nt(Var a, Var b);     // A(m,k) * B(n,k)^T
    Var add(Var a, Var b);           // same shape
    Var sub(Var a, Var b);
    Var add_rowvec(Var a, Var b);    // broadcast b (1,n) over rows of a
    Var mul(Var a, Var b);           // hadamard
    Var scale(Var a, double s);
    Var add_const(Var a, const Mat& c);
    Var mul_const(Var a, const Mat& c);      // hadamard with constant
    Var silu(Var a);
    Var square(Var a);

    // --- shape ---
    Var slice_cols(Var a, int c0, int n);
    Var slice_rows(Var a, int r0, int n);
    Var concat_cols(const std::vector<Var>& parts);
    Var concat_rows(const std::vector<Var>& parts);
    Var repeat_row(Var a, int n);    // a is (1,c) -> (n,c)

    // --- attention / normalization ---
    // softmax over each row restricted to columns with col_active != 0;
    // inactive columns get exactly 0
    Var softmax_rows(Var a, const std::vector<uint8_t>& col_active);
    // per-row layernorm with learned gain/bias (1,n)
    Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);

    // rows with mask != 0 taken from b, others copied bit-exactly from a
    Var blend_rows(Var a, Var b, const std::vector<uint8_t>& row_mask);
    // zero rows where mask == 0
    Var mask_rows(Var a, const std::vector<uint8_t>& row_mask);

    // --- reductions ---
    Var mean_all(Var a);
    Var sum_all(Var a);
    // mean over rows [0,valid_rows) and all columns of (a - target)^2
    Var mse(Var a, const Mat& target, int valid_rows);

    // custom op with externally computed value and hand-coded backward; the
    // callback receives dL/d(out) and accumulates into parents via
    // accum_grad()
    Var custom(Mat value, const std::vector<Var>& parents,
               std::function<void(Tape&, const Mat& out_grad)> backward);
    void accum_grad(Var v, const Mat& g) { accum(v.id, g); }

    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat val;
        Mat grad;
        bool rg = false;
        std::function<void(Tape&, const Mat&)> back;  // (tape, grad of this node)
    };

    Var push(Mat value, bool rg, std::function<void(Tape&, const Mat&)> back);
    void accum(int id, const Mat& g);

    std::vector<Node> nodes_;
};

}  // namespace sama::nn
