#include "model/model.hpp"

#include <cmath>
#include <stdexcept>

#include "core/ops.hpp"
#include "wavelet/haar.hpp"

namespace medivista {

namespace {

constexpr int kInputChannels = 1;

std::string block_name(const char* group, int i, const char* leaf) {
    return std::string(group) + "/block" + std::to_string(i) + "/" + leaf;
}

// Fixed DFT-quadrant sub-bands: the Fourier counterpart of the wavelet
// decomposition used by the FFM ablation. Low/high frequency split per axis,
// band-limited inverse, then 2x2 mean pooling to half resolution. Constant
// transform of the input, so it is built outside the tape.
std::vector<std::vector<double>> fourier_subbands(const Tensor& frame) {
    const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
    const int h2 = h / 2, w2 = w / 2;
    std::vector<std::vector<double>> bands(4);
    for (auto& b : bands) b.assign(static_cast<size_t>(c) * h2 * w2, 0.0);

    const double two_pi = 6.283185307179586476925286766559;
    std::vector<double> re(static_cast<size_t>(h) * w), im(static_cast<size_t>(h) * w);
    std::vector<double> band_plane(static_cast<size_t>(h) * w);
    for (int ch = 0; ch < c; ++ch) {
        const double* src = frame.data() + static_cast<int64_t>(ch) * h * w;
        // dense 2-D DFT; desk-scale frames keep this cheap enough
        for (int ky = 0; ky < h; ++ky)
            for (int kx = 0; kx < w; ++kx) {
                double sr = 0.0, si = 0.0;
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double ang = -two_pi * (static_cast<double>(ky) * y / h +
                                                      static_cast<double>(kx) * x / w);
                        const double v = src[static_cast<int64_t>(y) * w + x];
                        sr += v * std::cos(ang);
                        si += v * std::sin(ang);
                    }
                re[static_cast<size_t>(ky) * w + kx] = sr;
                im[static_cast<size_t>(ky) * w + kx] = si;
            }
        for (int band = 0; band < 4; ++band) {
            const bool hi_y = band / 2 != 0;
            const bool hi_x = band % 2 != 0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    double sr = 0.0;
                    for (int ky = 0; ky < h; ++ky) {
                        const bool ky_hi = std::min(ky, h - ky) >= h / 4;
                        if (ky_hi != hi_y) continue;
                        for (int kx = 0; kx < w; ++kx) {
                            const bool kx_hi = std::min(kx, w - kx) >= w / 4;
                            if (kx_hi != hi_x) continue;
                            const double ang = two_pi * (static_cast<double>(ky) * y / h +
                                                         static_cast<double>(kx) * x / w);
                            sr += re[static_cast<size_t>(ky) * w + kx] * std::cos(ang) -
                                  im[static_cast<size_t>(ky) * w + kx] * std::sin(ang);
                        }
                    }
                    band_plane[static_cast<size_t>(y) * w + x] = sr / (h * w);
                }
            double* dst = bands[static_cast<size_t>(band)].data() + static_cast<int64_t>(ch) * h2 * w2;
            for (int y = 0; y < h2; ++y)
                for (int x = 0; x < w2; ++x)
                    dst[static_cast<int64_t>(y) * w2 + x] =
                        0.25 * (band_plane[static_cast<size_t>(2 * y) * w + 2 * x] +
                                band_plane[static_cast<size_t>(2 * y) * w + 2 * x + 1] +
                                band_plane[static_cast<size_t>(2 * y + 1) * w + 2 * x] +
                                band_plane[static_cast<size_t>(2 * y + 1) * w + 2 * x + 1]);
        }
    }
    return bands;
}

}  // namespace

MediVistaModel::MediVistaModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.embed_dim;
    const int n = cfg_.tokens();
    const int p = cfg_.patch_size;
    const int ra = cfg_.adapter_rank;

    if (p != 4 && p != 8 && p != 16) {
        throw std::invalid_argument("model: patch size must be 4, 8 or 16 for the 4-step decoder");
    }
    int doublings = 0;
    for (int q = p; q > 1; q /= 2) ++doublings;
    up_factors_.assign(4, 1);
    for (int i = 0; i < doublings; ++i) up_factors_[static_cast<size_t>(i)] = 2;

    RngStream rng = RngStream::keyed({seed, 0x6d6f64656cULL});
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));

    auto randn = [&](const Shape& s, double stddev) { return Tensor::randn(s, rng, stddev); };

    // backbone
    params_.add("backbone/patch/w", randn({p * p * kInputChannels, d},
                                          1.0 / std::sqrt(static_cast<double>(p * p))), true);
    params_.add("backbone/pos", randn({n, d}, 0.02), true);
    for (int i = 0; i < cfg_.depth; ++i) {
        params_.add(block_name("backbone", i, "ln_s/gamma"), Tensor::full({d}, 1.0), true);
        params_.add(block_name("backbone", i, "ln_s/beta"), Tensor::zeros({d}), true);
        for (const char* leaf : {"sattn/wq", "sattn/wk", "sattn/wv", "sattn/wout"}) {
            params_.add(block_name("backbone", i, leaf), randn({d, d}, sd), true);
        }
        params_.add(block_name("backbone", i, "ln_m/gamma"), Tensor::full({d}, 1.0), true);
        params_.add(block_name("backbone", i, "ln_m/beta"), Tensor::zeros({d}), true);
        params_.add(block_name("backbone", i, "mlp/w1"), randn({d, cfg_.mlp_ratio * d}, sd), true);
        params_.add(block_name("backbone", i, "mlp/b1"), Tensor::zeros({cfg_.mlp_ratio * d}), true);
        params_.add(block_name("backbone", i, "mlp/w2"),
                    randn({cfg_.mlp_ratio * d, d},
                          1.0 / std::sqrt(static_cast<double>(cfg_.mlp_ratio * d))),
                    true);
        params_.add(block_name("backbone", i, "mlp/b2"), Tensor::zeros({d}), true);
    }

    // temporal adapters; output projection starts at zero so a freshly built
    // model reproduces the plain backbone
    if (cfg_.attention_order != "spatial_only") {
        for (int i = 0; i < cfg_.depth; ++i) {
            params_.add(block_name("adapter", i, "ln/gamma"), Tensor::full({d}, 1.0), true);
            params_.add(block_name("adapter", i, "ln/beta"), Tensor::zeros({d}), true);
            if (cfg_.temporal_mode == "conv") {
                params_.add(block_name("adapter", i, "taps"),
                            Tensor::from({3}, {0.0, 1.0, 0.0}), true);
            } else if (ra > 0) {
                for (const char* leaf : {"aq", "bq", "ak", "bk", "av", "bv"}) {
                    params_.add(block_name("adapter", i, leaf), randn({d, ra}, sd), true);
                }
            } else {
                for (const char* leaf : {"wq", "wk", "wv"}) {
                    params_.add(block_name("adapter", i, leaf), randn({d, d}, sd), true);
                }
            }
            if (ra > 0) {
                params_.add(block_name("adapter", i, "a_out"), randn({d, ra}, sd), true);
                params_.add(block_name("adapter", i, "b_out"), Tensor::zeros({d, ra}), true);
            } else {
                params_.add(block_name("adapter", i, "wout"), Tensor::zeros({d, d}), true);
            }
        }
    }

    // frequency feature fusion branch + shared cross-branch attention
    if (cfg_.ffm_enabled) {
        const int ch = cfg_.ffm_channels;
        if (cfg_.ffm_transform == "none") {
            params_.add("ffm/stem",
                        randn({ch, kInputChannels, 3, 3},
                              1.0 / std::sqrt(9.0 * kInputChannels)),
                        true);
        }
        const int in0 = cfg_.ffm_transform == "none" ? ch : 4 * kInputChannels;
        params_.add("ffm/conv0", randn({ch, in0, 3, 3}, 1.0 / std::sqrt(9.0 * in0)), true);
        for (int s = 1; s < 4; ++s) {
            params_.add("ffm/conv" + std::to_string(s),
                        randn({ch, ch, 3, 3}, 1.0 / std::sqrt(9.0 * ch)), true);
        }
        for (int s = 0; s < 4; ++s) {
            params_.add("ffm/proj" + std::to_string(s),
                        randn({ch, d}, 1.0 / std::sqrt(static_cast<double>(ch))), true);
        }
        if (ra > 0) {
            for (const char* leaf : {"aq", "bq", "ak", "bk", "av", "bv"}) {
                params_.add(std::string("cba/") + leaf, randn({d, ra}, sd), true);
            }
        } else {
            for (const char* leaf : {"wq", "wk", "wv"}) {
                params_.add(std::string("cba/") + leaf, randn({d, d}, sd), true);
            }
        }
    }

    // decoder: width sequence d -> d/2 -> d/4 -> d/8 -> d/8
    {
        const int widths[5] = {d, d / 2, d / 4, d / 8, d / 8};
        for (int s = 0; s < 4; ++s) {
            params_.add("decoder/step" + std::to_string(s) + "/conv",
                        randn({widths[s + 1], widths[s], 3, 3},
                              1.0 / std::sqrt(9.0 * widths[s])),
                        true);
            if (s < 3 && cfg_.multiscale_fusion) {
                params_.add("decoder/step" + std::to_string(s) + "/skip",
                            randn({widths[s + 1], d, 1, 1}, sd), true);
            }
        }
        params_.add("decoder/head",
                    randn({cfg_.num_classes, widths[4], 1, 1},
                          1.0 / std::sqrt(static_cast<double>(widths[4]))),
                    true);
    }

    // factorized fine-tuning state
    if (cfg_.fact.enabled) {
        fact_ = make_fact_factors(d, cfg_.fact.rank, cfg_.depth, cfg_.fact.split_uv, rng);
        fact_.u = params_.add("fact/u", fact_.u, true);
        fact_.v = params_.add("fact/v", fact_.v, true);
        if (fact_.split_uv) {
            fact_.u_val = params_.add("fact/u_value", fact_.u_val, true);
            fact_.v_val = params_.add("fact/v_value", fact_.v_val, true);
        }
        for (auto& [key, sigma] : fact_.sigmas) {
            const std::string name = "fact/sigma" + std::to_string(key.first) + "_" +
                                     fact_proj_name(static_cast<FactProj>(key.second));
            sigma = params_.add(name, sigma, true);
        }
    }

    set_phase(Phase::adapt);
}

void MediVistaModel::set_phase(Phase phase) {
    phase_ = phase;
    params_.set_trainable_by_prefix("backbone/", phase == Phase::pretrain);
    params_.set_trainable_by_prefix("adapter/", true);
    params_.set_trainable_by_prefix("ffm/", true);
    params_.set_trainable_by_prefix("cba/", true);
    params_.set_trainable_by_prefix("decoder/", true);
    params_.set_trainable_by_prefix("fact/", phase == Phase::adapt);
}

Tensor MediVistaModel::low_rank_or_dense(const std::string& a, const std::string& b,
                                         const std::string& dense) const {
    if (cfg_.adapter_rank > 0) return matmul(params_.get(a), transpose(params_.get(b)));
    return params_.get(dense);
}

AttentionWeights MediVistaModel::adapter_weights(int block) const {
    AttentionWeights w;
    w.wq = low_rank_or_dense(block_name("adapter", block, "aq"), block_name("adapter", block, "bq"),
                             block_name("adapter", block, "wq"));
    w.wk = low_rank_or_dense(block_name("adapter", block, "ak"), block_name("adapter", block, "bk"),
                             block_name("adapter", block, "wk"));
    w.wv = low_rank_or_dense(block_name("adapter", block, "av"), block_name("adapter", block, "bv"),
                             block_name("adapter", block, "wv"));
    // wout is applied by adapter_update on the residual path
    return w;
}

AttentionWeights MediVistaModel::spatial_weights(int block) const {
    AttentionWeights w;
    Tensor wq0 = params_.get(block_name("backbone", block, "sattn/wq"));
    Tensor wv0 = params_.get(block_name("backbone", block, "sattn/wv"));
    if (cfg_.fact.enabled) {
        w.wq = fact_apply(wq0, fact_, block, FactProj::query);
        w.wv = fact_apply(wv0, fact_, block, FactProj::value);
    } else {
        w.wq = wq0;
        w.wv = wv0;
    }
    w.wk = params_.get(block_name("backbone", block, "sattn/wk"));
    w.wout = params_.get(block_name("backbone", block, "sattn/wout"));
    return w;
}

AttentionWeights MediVistaModel::cba_weights() const {
    AttentionWeights w;
    w.wq = low_rank_or_dense("cba/aq", "cba/bq", "cba/wq");
    w.wk = low_rank_or_dense("cba/ak", "cba/bk", "cba/wk");
    w.wv = low_rank_or_dense("cba/av", "cba/bv", "cba/wv");
    w.wout = w.wq;  // unused; cross-branch attention is residual without wout
    return w;
}

TemporalKernel MediVistaModel::kernel_for(const Tensor& video) const {
    const int t = cfg_.frames;
    if (cfg_.temporal_mode == "first_frame") return first_frame_kernel(t);
    if (cfg_.kernel.type == "laplacian") {
        return laplacian_kernel(t, cfg_.kernel.sigma, cfg_.kernel.window, cfg_.kernel.normalized);
    }
    if (cfg_.kernel.type == "bilateral") {
        std::vector<double> means(static_cast<size_t>(t), 0.0);
        const int64_t frame_elems = video.numel() / t;  // [C,T,H,W]: C=1
        const double* pv = video.data();
        for (int f = 0; f < t; ++f) {
            double s = 0.0;
            for (int64_t i = 0; i < frame_elems; ++i) s += pv[f * frame_elems + i];
            means[static_cast<size_t>(f)] = s / static_cast<double>(frame_elems);
        }
        return bilateral_kernel(t, cfg_.kernel.sigma, cfg_.kernel.window, cfg_.kernel.normalized,
                                means);
    }
    return gaussian_kernel(t, cfg_.kernel.sigma, cfg_.kernel.window, cfg_.kernel.normalized);
}

Tensor MediVistaModel::patch_embed(const Tensor& video) const {
    if (video.ndim() != 4 || video.dim(0) != kInputChannels || video.dim(1) != cfg_.frames ||
        video.dim(2) != cfg_.height || video.dim(3) != cfg_.width) {
        throw std::invalid_argument("patch_embed: expected [" + std::to_string(kInputChannels) +
                                    "," + std::to_string(cfg_.frames) + "," +
                                    std::to_string(cfg_.height) + "," + std::to_string(cfg_.width) +
                                    "], got " + shape_str(video.shape()));
    }
    const int t = cfg_.frames;
    std::vector<Tensor> frames;
    frames.reserve(static_cast<size_t>(t));
    for (int f = 0; f < t; ++f) {
        Tensor frame = reshape(slice(video, 1, f, 1), {kInputChannels, cfg_.height, cfg_.width});
        frames.push_back(extract_patches(frame, cfg_.patch_size));
    }
    Tensor patches = concat(frames, 0);  // [T*N, p*p*C]
    Tensor tokens = matmul(patches, params_.get("backbone/patch/w"));
    tokens = reshape(tokens, {t, cfg_.tokens(), cfg_.embed_dim});
    return add_bcast(tokens, params_.get("backbone/pos"));
}

std::vector<Tensor> MediVistaModel::ffm_branch(const Tensor& frame) const {
    if (!cfg_.ffm_enabled) throw std::logic_error("ffm_branch: module disabled in this config");
    if (frame.ndim() != 3 || frame.dim(1) % 2 != 0 || frame.dim(2) % 2 != 0) {
        throw std::invalid_argument("ffm_branch: even-sized [C,H,W] frame expected, got " +
                                    shape_str(frame.shape()));
    }
    Tensor x;
    if (cfg_.ffm_transform == "wavelet") {
        x = subbands_channels(haar_dwt2(frame));
    } else if (cfg_.ffm_transform == "fourier") {
        const int c = frame.dim(0), h2 = frame.dim(1) / 2, w2 = frame.dim(2) / 2;
        auto bands = fourier_subbands(frame);
        std::vector<Tensor> ts;
        ts.reserve(4);
        for (auto& b : bands) ts.push_back(Tensor::from({c, h2, w2}, std::move(b)));
        x = concat(ts, 0);
    } else {  // raw-input CNN: extra stride-2 stem replaces the transform
        x = gelu(conv2d(frame, params_.get("ffm/stem"), 2, 1));
    }
    std::vector<Tensor> maps;
    maps.reserve(4);
    for (int s = 0; s < 4; ++s) {
        x = gelu(conv2d(x, params_.get("ffm/conv" + std::to_string(s)), 2, 1));
        maps.push_back(x);
    }
    return maps;
}

std::vector<std::vector<Tensor>> MediVistaModel::ffm_tokens(const Tensor& video) const {
    std::vector<std::vector<Tensor>> per_frame(static_cast<size_t>(cfg_.frames));
    for (int f = 0; f < cfg_.frames; ++f) {
        Tensor frame = reshape(slice(video, 1, f, 1), {kInputChannels, cfg_.height, cfg_.width});
        std::vector<Tensor> maps = ffm_branch(frame);
        per_frame[static_cast<size_t>(f)].reserve(4);
        for (int s = 0; s < 4; ++s) {
            const Tensor& m = maps[static_cast<size_t>(s)];
            Tensor tok = transpose(reshape(m, {m.dim(0), m.dim(1) * m.dim(2)}));
            per_frame[static_cast<size_t>(f)].push_back(
                matmul(tok, params_.get("ffm/proj" + std::to_string(s))));
        }
    }
    return per_frame;
}

Tensor MediVistaModel::adapter_update(int block, const Tensor& x,
                                      const TemporalKernel& kernel) const {
    const int t = cfg_.frames, n = cfg_.tokens(), d = cfg_.embed_dim;
    Tensor h = layer_norm(reshape(x, {t * n, d}), params_.get(block_name("adapter", block, "ln/gamma")),
                          params_.get(block_name("adapter", block, "ln/beta")));
    h = reshape(h, {t, n, d});
    Tensor wout;
    if (cfg_.adapter_rank > 0) {
        wout = matmul(params_.get(block_name("adapter", block, "a_out")),
                      transpose(params_.get(block_name("adapter", block, "b_out"))));
    } else {
        wout = params_.get(block_name("adapter", block, "wout"));
    }
    Tensor a;
    if (cfg_.temporal_mode == "conv") {
        // 3-tap temporal mix, edge frames clamped
        Tensor prev = t > 1 ? concat({slice(h, 0, 0, 1), slice(h, 0, 0, t - 1)}, 0) : h;
        Tensor next = t > 1 ? concat({slice(h, 0, 1, t - 1), slice(h, 0, t - 1, 1)}, 0) : h;
        Tensor taps = params_.get(block_name("adapter", block, "taps"));
        auto tap = [&](int i) { return slice(taps, 0, i, 1); };
        a = add(add(scale_by(prev, tap(0)), scale_by(h, tap(1))), scale_by(next, tap(2)));
    } else if (cfg_.temporal_mode == "plain") {
        a = temporal_attention(h, adapter_weights(block), cfg_.heads);
    } else {
        a = temporal_fusion_attention(h, adapter_weights(block), kernel, cfg_.heads);
    }
    return reshape(matmul(reshape(a, {t * n, d}), wout), {t, n, d});
}

std::vector<Tensor> MediVistaModel::encoder_forward(const Tensor& video) const {
    Tensor x = patch_embed(video);
    const TemporalKernel kernel = kernel_for(video);
    std::vector<std::vector<Tensor>> cnn_tokens;
    if (cfg_.ffm_enabled) cnn_tokens = ffm_tokens(video);

    const int stage_len = cfg_.depth / 4;
    std::vector<Tensor> stages;
    stages.reserve(4);
    for (int i = 0; i < cfg_.depth; ++i) {
        x = apply_block(i, x, kernel);
        if ((i + 1) % stage_len == 0) {
            const int s = (i + 1) / stage_len - 1;
            if (cfg_.ffm_enabled) {
                AttentionWeights cw = cba_weights();
                std::vector<Tensor> fused;
                fused.reserve(static_cast<size_t>(cfg_.frames));
                for (int f = 0; f < cfg_.frames; ++f) {
                    Tensor xf = reshape(slice(x, 0, f, 1), {cfg_.tokens(), cfg_.embed_dim});
                    fused.push_back(cross_branch_attention(
                        xf, cnn_tokens[static_cast<size_t>(f)][static_cast<size_t>(s)], cw,
                        cfg_.heads));
                }
                x = stack0(fused);
            }
            stages.push_back(x);
        }
    }
    return stages;
}

Tensor MediVistaModel::apply_block(int block, Tensor x, const TemporalKernel& kernel) const {
    const int t = cfg_.frames, n = cfg_.tokens(), d = cfg_.embed_dim;
    const bool has_adapter = cfg_.attention_order != "spatial_only";

    auto run_spatial = [&](Tensor in) {
        Tensor h = layer_norm(reshape(in, {t * n, d}),
                              params_.get(block_name("backbone", block, "ln_s/gamma")),
                              params_.get(block_name("backbone", block, "ln_s/beta")));
        h = reshape(h, {t, n, d});
        AttentionWeights sw = spatial_weights(block);
        std::vector<Tensor> frames;
        frames.reserve(static_cast<size_t>(t));
        for (int f = 0; f < t; ++f) {
            Tensor hf = reshape(slice(h, 0, f, 1), {n, d});
            frames.push_back(self_attention(hf, sw, cfg_.heads));
        }
        Tensor s = reshape(stack0(frames), {t * n, d});
        return add(in, reshape(matmul(s, sw.wout), {t, n, d}));
    };

    if (has_adapter && cfg_.attention_order == "temporal_first") {
        x = add(x, adapter_update(block, x, kernel));
        x = run_spatial(x);
    } else if (has_adapter && cfg_.attention_order == "spatial_first") {
        x = run_spatial(x);
        x = add(x, adapter_update(block, x, kernel));
    } else {
        x = run_spatial(x);
    }

    Tensor h = layer_norm(reshape(x, {t * n, d}),
                          params_.get(block_name("backbone", block, "ln_m/gamma")),
                          params_.get(block_name("backbone", block, "ln_m/beta")));
    Tensor m = matmul(h, params_.get(block_name("backbone", block, "mlp/w1")));
    m = gelu(add_bcast(m, params_.get(block_name("backbone", block, "mlp/b1"))));
    m = matmul(m, params_.get(block_name("backbone", block, "mlp/w2")));
    m = add_bcast(m, params_.get(block_name("backbone", block, "mlp/b2")));
    return add(x, reshape(m, {t, n, d}));
}

Tensor MediVistaModel::decoder_forward(const std::vector<Tensor>& stages) const {
    if (stages.size() != 4) {
        throw std::invalid_argument("decoder_forward: expected 4 stage tensors, got " +
                                    std::to_string(stages.size()));
    }
    const int t = cfg_.frames, n = cfg_.tokens(), d = cfg_.embed_dim;
    const int gh = cfg_.grid_h(), gw = cfg_.grid_w();
    for (const Tensor& s : stages) {
        if (s.ndim() != 3 || s.dim(0) != t || s.dim(1) != n || s.dim(2) != d) {
            throw std::invalid_argument("decoder_forward: stage shape " + shape_str(s.shape()) +
                                        " does not match [T,N,d]");
        }
    }

    std::vector<Tensor> frame_logits;
    frame_logits.reserve(static_cast<size_t>(t));
    for (int f = 0; f < t; ++f) {
        auto stage_grid = [&](int s) {
            Tensor tok = reshape(slice(stages[static_cast<size_t>(s)], 0, f, 1), {n, d});
            return reshape(transpose(tok), {d, gh, gw});
        };
        Tensor u = stage_grid(3);
        int ups = 0;
        for (int s = 0; s < 4; ++s) {
            if (up_factors_[static_cast<size_t>(s)] == 2) {
                u = bilinear_up2(u);
                ++ups;
            }
            u = gelu(conv2d(u, params_.get("decoder/step" + std::to_string(s) + "/conv"), 1, 1));
            if (s < 3 && cfg_.multiscale_fusion) {
                Tensor skip = conv2d(stage_grid(2 - s),
                                     params_.get("decoder/step" + std::to_string(s) + "/skip"), 1, 0);
                for (int k = 0; k < ups; ++k) skip = bilinear_up2(skip);
                u = add(u, skip);
            }
        }
        frame_logits.push_back(conv2d(u, params_.get("decoder/head"), 1, 0));
    }
    Tensor out = stack0(frame_logits);  // [T, classes, H, W]
    out = reshape(out, {t, cfg_.num_classes, cfg_.height * cfg_.width});
    out = swap01(out);
    return reshape(out, {cfg_.num_classes, t, cfg_.height, cfg_.width});
}

Tensor MediVistaModel::forward_one(const Tensor& video) const {
    return decoder_forward(encoder_forward(video));
}

Tensor MediVistaModel::forward(const Tensor& video) const {
    if (video.ndim() != 5) {
        throw std::invalid_argument("forward: expected video [B,C,T,H,W], got " +
                                    shape_str(video.shape()));
    }
    const double* pv = video.data();
    for (int64_t i = 0; i < video.numel(); ++i) {
        if (pv[i] < -1e-6 || pv[i] > 1.0 + 1e-6) {
            throw std::invalid_argument(
                "forward: input must be min-max normalized to [0,1]; found value " +
                std::to_string(pv[i]));
        }
    }
    const int b = video.dim(0);
    std::vector<Tensor> outs;
    outs.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        Tensor one = reshape(slice(video, 0, i, 1),
                             {video.dim(1), video.dim(2), video.dim(3), video.dim(4)});
        outs.push_back(forward_one(one));
    }
    return stack0(outs);
}

Tensor medivista_forward(const Tensor& video, const MediVistaModel& model) {
    return model.forward(video);
}

}  // namespace medivista
