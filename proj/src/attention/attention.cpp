#include "attention/attention.hpp"

#include <cmath>
#include <stdexcept>

#include "core/ops.hpp"

namespace medivista {

namespace {

void require_square(const AttentionWeights& w) {
    for (const Tensor* m : {&w.wq, &w.wk, &w.wv}) {
        if (m->ndim() != 2 || m->dim(0) != m->dim(1) || m->dim(0) != w.wq.dim(0)) {
            throw std::invalid_argument("attention: wq/wk/wv must be square of one dimension, got " +
                                        shape_str(m->shape()));
        }
    }
}

void require_dim(const Tensor& x, int d, const char* who) {
    if (x.ndim() < 1 || x.dim(x.ndim() - 1) != d) {
        throw std::invalid_argument(std::string(who) + ": feature dim of " +
                                    shape_str(x.shape()) + " does not match weights d=" +
                                    std::to_string(d));
    }
}

}  // namespace

Tensor attention_core(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
    if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2 || q.dim(1) != k.dim(1) ||
        k.shape() != v.shape()) {
        throw std::invalid_argument("attention_core: got q " + shape_str(q.shape()) + ", k " +
                                    shape_str(k.shape()) + ", v " + shape_str(v.shape()));
    }
    const int d = q.dim(1);
    if (heads < 1 || d % heads != 0) {
        throw std::invalid_argument("attention_core: head count " + std::to_string(heads) +
                                    " does not divide d=" + std::to_string(d));
    }
    const int dh = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    if (heads == 1) {
        Tensor scores = scale(matmul(q, transpose(k)), inv_sqrt);
        return matmul(softmax(scores, 1), v);
    }
    std::vector<Tensor> outs;
    outs.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        Tensor qh = slice(q, 1, h * dh, dh);
        Tensor kh = slice(k, 1, h * dh, dh);
        Tensor vh = slice(v, 1, h * dh, dh);
        Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
        outs.push_back(matmul(softmax(scores, 1), vh));
    }
    return concat(outs, 1);
}

Tensor self_attention(const Tensor& x, const AttentionWeights& w, int heads) {
    require_square(w);
    if (x.ndim() != 2) throw std::invalid_argument("self_attention: x must be [N,d]");
    require_dim(x, w.dim(), "self_attention");
    return attention_core(matmul(x, w.wq), matmul(x, w.wk), matmul(x, w.wv), heads);
}

Tensor temporal_fusion_attention(const Tensor& x, const AttentionWeights& w,
                                 const TemporalKernel& kernel, int heads) {
    require_square(w);
    if (x.ndim() != 3) throw std::invalid_argument("temporal_fusion_attention: x must be [T,N,d]");
    require_dim(x, w.dim(), "temporal_fusion_attention");
    const int t = x.dim(0), n = x.dim(1), d = x.dim(2);
    if (kernel.frames() != t) {
        throw std::invalid_argument("temporal_fusion_attention: kernel covers " +
                                    std::to_string(kernel.frames()) + " frames but clip has " +
                                    std::to_string(t));
    }

    Tensor flat = reshape(x, {t * n, d});
    Tensor q = reshape(matmul(flat, w.wq), {t, n, d});
    Tensor k = matmul(flat, w.wk);
    Tensor v = matmul(flat, w.wv);

    // k_hat[t] = sum_tau phi(t,tau) k[tau]; one GEMM over the frame axis
    Tensor k_mix = reshape(matmul(kernel.weights, reshape(k, {t, n * d})), {t, n, d});
    Tensor v_mix = reshape(matmul(kernel.weights, reshape(v, {t, n * d})), {t, n, d});

    std::vector<Tensor> frames;
    frames.reserve(static_cast<size_t>(t));
    for (int f = 0; f < t; ++f) {
        Tensor qf = reshape(slice(q, 0, f, 1), {n, d});
        Tensor kf = reshape(slice(k_mix, 0, f, 1), {n, d});
        Tensor vf = reshape(slice(v_mix, 0, f, 1), {n, d});
        frames.push_back(attention_core(qf, kf, vf, heads));
    }
    return stack0(frames);
}

Tensor temporal_attention(const Tensor& x, const AttentionWeights& w, int heads) {
    require_square(w);
    if (x.ndim() != 3) throw std::invalid_argument("temporal_attention: x must be [T,N,d]");
    require_dim(x, w.dim(), "temporal_attention");
    const int t = x.dim(0), n = x.dim(1), d = x.dim(2);
    Tensor flat = reshape(x, {t * n, d});
    Tensor q = swap01(reshape(matmul(flat, w.wq), {t, n, d}));  // [N,T,d]
    Tensor k = swap01(reshape(matmul(flat, w.wk), {t, n, d}));
    Tensor v = swap01(reshape(matmul(flat, w.wv), {t, n, d}));
    std::vector<Tensor> tokens;
    tokens.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Tensor qi = reshape(slice(q, 0, i, 1), {t, d});
        Tensor ki = reshape(slice(k, 0, i, 1), {t, d});
        Tensor vi = reshape(slice(v, 0, i, 1), {t, d});
        tokens.push_back(attention_core(qi, ki, vi, heads));
    }
    return swap01(stack0(tokens));  // [N,T,d] -> [T,N,d]
}

Tensor cross_branch_attention(const Tensor& f_v, const Tensor& f_c, const AttentionWeights& w,
                              int heads) {
    require_square(w);
    if (f_v.ndim() != 2 || f_c.ndim() != 2) {
        throw std::invalid_argument("cross_branch_attention: f_v and f_c must be rank-2");
    }
    if (f_v.dim(1) != f_c.dim(1)) {
        throw std::invalid_argument("cross_branch_attention: feature dims differ, " +
                                    shape_str(f_v.shape()) + " vs " + shape_str(f_c.shape()));
    }
    require_dim(f_v, w.dim(), "cross_branch_attention");
    Tensor out = attention_core(matmul(f_v, w.wq), matmul(f_c, w.wk), matmul(f_c, w.wv), heads);
    return add(f_v, out);
}

}  // namespace medivista
