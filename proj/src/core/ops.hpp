#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace medivista {

// Elementwise (same shape unless noted)
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
// y = s[0] * x for a [1] tensor s; gradients flow to both operands.
Tensor scale_by(const Tensor& x, const Tensor& s);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor gelu(const Tensor& a);

// b's shape must be a suffix of a's shape; b is broadcast over the leading
// axes (covers bias rows and per-token positional embeddings).
Tensor add_bcast(const Tensor& a, const Tensor& b);

// Linear algebra
Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,n] -> [m,n]
Tensor transpose(const Tensor& a);                // rank-2
Tensor swap01(const Tensor& a);                   // rank-3 axis swap (0,1)

// Shape ops
Tensor reshape(const Tensor& a, const Shape& shape);
Tensor slice(const Tensor& a, int axis, int start, int len);
Tensor concat(const std::vector<Tensor>& xs, int axis);
// Stacks same-shaped tensors along a new leading axis.
Tensor stack0(const std::vector<Tensor>& xs);

// Reductions
Tensor sum(const Tensor& a);   // -> [1]
Tensor mean(const Tensor& a);  // -> [1]

// Normalization / activations along an axis
Tensor softmax(const Tensor& a, int axis);
Tensor log_softmax(const Tensor& a, int axis);
// Normalizes the last axis; gamma/beta are rank-1 of that extent.
Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

// Image ops (channels-first rank-3 [C,H,W]; weights [Cout,Cin,kh,kw])
Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad);
Tensor bilinear_up2(const Tensor& x);
// Non-overlapping p-by-p patches flattened row-major (c, dy, dx) -> [N, p*p*C]
Tensor extract_patches(const Tensor& x, int patch);

}  // namespace medivista
