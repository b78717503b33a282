#pragma once

#include "attention/temporal_kernel.hpp"
#include "core/tensor.hpp"

namespace medivista {

// Projection weights for one attention block. The attention functions below
// consume wq/wk/wv only; callers apply wout on the residual path.
struct AttentionWeights {
    Tensor wq, wk, wv, wout;  // each [d,d]

    int dim() const { return wq.dim(0); }
};

// softmax(q k^T / sqrt(d_head)) v, split over heads along the feature axis.
Tensor attention_core(const Tensor& q, const Tensor& k, const Tensor& v, int heads = 1);

// Per-frame attention over tokens: softmax(Q K^T / sqrt(d)) V.  x is [N,d].
Tensor self_attention(const Tensor& x, const AttentionWeights& w, int heads = 1);

// Temporal fusion attention over a clip x [T,N,d]: per-frame q/k/v, keys and
// values replaced by kernel-weighted mixtures over frames, then per-frame
// attention against the mixed keys/values.
Tensor temporal_fusion_attention(const Tensor& x, const AttentionWeights& w,
                                 const TemporalKernel& kernel, int heads = 1);

// Per-token attention across frames (no kernel mixing); the bifurcated
// space-time adapter used by the attention-order and adapter-type ablations.
Tensor temporal_attention(const Tensor& x, const AttentionWeights& w, int heads = 1);

// Residual cross attention: f_v [N,d] queries the CNN tokens f_c [M,d];
// returns f_v + softmax(Q(f_v) K(f_c)^T / sqrt(d)) V(f_c), bias-free.
Tensor cross_branch_attention(const Tensor& f_v, const Tensor& f_c, const AttentionWeights& w,
                              int heads = 1);

}  // namespace medivista
