#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "stim/tensor.hpp"

namespace stim {

// Reverse-mode graph node. The model graphs are small and rebuilt per step;
// parameters are long-lived leaf nodes whose grads accumulate across a step.
struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;  // pushes this->grad into parents

    void zero_grad() { grad.fill(0.0); }
};

using VarPtr = std::shared_ptr<Node>;

// Leaf holding a constant (no gradient flows into it).
VarPtr constant(Tensor value);
// Leaf with a gradient buffer; used for Parameters.
VarPtr leaf(Tensor value);

// Runs reverse-mode accumulation from a scalar (1x1) node.
void backward(const VarPtr& loss);

namespace ops {

// C[B,m] = A[B,n] * W[n,m]
VarPtr matmul(const VarPtr& a, const VarPtr& w);
// Broadcast-add a [1,m] row vector to every row of A[B,m].
VarPtr add_rowvec(const VarPtr& a, const VarPtr& b);
VarPtr add(const VarPtr& a, const VarPtr& b);
VarPtr sub(const VarPtr& a, const VarPtr& b);
VarPtr mul(const VarPtr& a, const VarPtr& b);  // elementwise, same shape
// A[B,d] scaled per row by s[B,1].
VarPtr scale_rows(const VarPtr& a, const VarPtr& s);
VarPtr mul_const(const VarPtr& a, Tensor c);
VarPtr add_const(const VarPtr& a, Tensor c);
VarPtr scale(const VarPtr& a, double c);

VarPtr relu(const VarPtr& a);
VarPtr sigmoid(const VarPtr& a);

// Row softmax with a validity mask: invalid entries are excluded (additive
// -inf semantics); rows with no valid entry come out all-zero.
VarPtr softmax_rows_masked(const VarPtr& x, const std::vector<bool>& valid);
VarPtr softmax_rows(const VarPtr& x);

// Unit-normalizes each row; rows with norm < 1e-12 pass through unchanged
// (identity gradient there).
VarPtr l2norm_rows(const VarPtr& x);

// [B,1] of per-row dot products of A[B,d] and B[B,d].
VarPtr rowwise_dot(const VarPtr& a, const VarPtr& b);

VarPtr concat_cols(const std::vector<VarPtr>& parts);
VarPtr slice_cols(const VarPtr& a, std::size_t start, std::size_t len);

// Repeats each row of A[B,d] L times -> [B*L,d]; backward sums the copies.
VarPtr tile_rows(const VarPtr& a, std::size_t l);

// O[b,:] = sum_l w[b,l] * V[b*L+l,:], with w[B,L] and V[B*L,d].
VarPtr attention_pool(const VarPtr& w, const VarPtr& v);

// Same data, new {rows, cols} view.
VarPtr reshape(const VarPtr& a, std::size_t rows, std::size_t cols);

// Gathers rows of a parameter table [V,d] at `indices` -> [B,d].
VarPtr gather_rows(const VarPtr& table, const std::vector<std::size_t>& indices);

// Batch-mean binary cross entropy with clamped probabilities. yhat is [B,1],
// labels are 0/1. Returns a [1,1] scalar node.
VarPtr bce_loss(const VarPtr& yhat, const std::vector<double>& labels);

// Batch-mean of (f(x) elementwise summed); used by tests as a scalar reducer.
VarPtr sum_all(const VarPtr& a);

}  // namespace ops
}  // namespace stim
