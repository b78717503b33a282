#include <cmath>

#include "attention/attention.hpp"
#include "cli/commands.hpp"
#include "core/gradcheck.hpp"
#include "core/ops.hpp"
#include "fact/fact.hpp"
#include "model/model.hpp"
#include "train/loss.hpp"
#include "wavelet/haar.hpp"

namespace medivista {

namespace {

std::vector<double> draw(RngStream& rng, int64_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

AttentionWeights weights_from(const std::vector<Tensor>& in, size_t at) {
    AttentionWeights w;
    w.wq = in[at];
    w.wk = in[at + 1];
    w.wv = in[at + 2];
    w.wout = in[at + 2];
    return w;
}

void add_cases() {
    auto& reg = GradCheckRegistry::instance();

    reg.add({"haar_dwt2", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 101});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return mul(subbands_channels(haar_dwt2(in[0])), in[1]);
                     },
                     {{2, 4, 4}, {8, 2, 2}}, {draw(rng, 32), draw(rng, 32)}, tol);
             }});
    reg.add({"haar_dwt2_odd", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 102});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return mul(subbands_channels(haar_dwt2(in[0])), in[1]);
                     },
                     {{1, 5, 5}, {4, 3, 3}}, {draw(rng, 25), draw(rng, 36)}, tol);
             }});
    reg.add({"haar_idwt2", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 103});
                 std::vector<Shape> shapes(4, Shape{1, 3, 3});
                 std::vector<std::vector<double>> base;
                 for (int i = 0; i < 4; ++i) base.push_back(draw(rng, 9));
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         WaveletSubbands sb{in[0], in[1], in[2], in[3], 6, 6};
                         return haar_idwt2(sb);
                     },
                     shapes, base, tol);
             }});
    reg.add({"self_attention", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 104});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return self_attention(in[0], weights_from(in, 1));
                     },
                     {{4, 4}, {4, 4}, {4, 4}, {4, 4}},
                     {draw(rng, 16), draw(rng, 16), draw(rng, 16), draw(rng, 16)}, tol);
             }});
    reg.add({"self_attention_heads2", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 105});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return self_attention(in[0], weights_from(in, 1), 2);
                     },
                     {{3, 4}, {4, 4}, {4, 4}, {4, 4}},
                     {draw(rng, 12), draw(rng, 16), draw(rng, 16), draw(rng, 16)}, tol);
             }});
    reg.add({"temporal_fusion_attention", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 106});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         TemporalKernel k = gaussian_kernel(3, 1.0, 3, true);
                         return temporal_fusion_attention(in[0], weights_from(in, 1), k);
                     },
                     {{3, 2, 4}, {4, 4}, {4, 4}, {4, 4}},
                     {draw(rng, 24), draw(rng, 16), draw(rng, 16), draw(rng, 16)}, tol);
             }});
    reg.add({"temporal_attention", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 107});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return temporal_attention(in[0], weights_from(in, 1));
                     },
                     {{3, 2, 4}, {4, 4}, {4, 4}, {4, 4}},
                     {draw(rng, 24), draw(rng, 16), draw(rng, 16), draw(rng, 16)}, tol);
             }});
    reg.add({"cross_branch_attention", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 108});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         return cross_branch_attention(in[0], in[1], weights_from(in, 2));
                     },
                     {{3, 4}, {5, 4}, {4, 4}, {4, 4}, {4, 4}},
                     {draw(rng, 12), draw(rng, 20), draw(rng, 16), draw(rng, 16), draw(rng, 16)},
                     tol);
             }});
    reg.add({"scale_by", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 109});
                 return grad_check(
                     [](const std::vector<Tensor>& in) { return scale_by(in[0], in[1]); },
                     {{3, 4}, {1}}, {draw(rng, 12), draw(rng, 1)}, tol);
             }});
    reg.add({"fact_delta", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 110});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         FacTFactors f;
                         f.dim = 5;
                         f.rank = 2;
                         f.u = in[0];
                         f.v = in[1];
                         f.sigmas[{0, 0}] = in[2];
                         return fact_delta(f, 0, FactProj::query);
                     },
                     {{5, 2}, {5, 2}, {2, 2}}, {draw(rng, 10), draw(rng, 10), draw(rng, 4)}, tol);
             }});
    reg.add({"fact_apply", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 111});
                 return grad_check(
                     [](const std::vector<Tensor>& in) {
                         FacTFactors f;
                         f.dim = 5;
                         f.rank = 2;
                         f.u = in[1];
                         f.v = in[2];
                         f.sigmas[{0, 1}] = in[3];
                         return fact_apply(in[0], f, 0, FactProj::value);
                     },
                     {{5, 5}, {5, 2}, {5, 2}, {2, 2}},
                     {draw(rng, 25), draw(rng, 10), draw(rng, 10), draw(rng, 4)}, tol);
             }});
    reg.add({"masked_loss", 1e-5, false, [](uint64_t seed, double tol) {
                 RngStream rng = RngStream::keyed({seed, 112});
                 SparseLabels labels;
                 labels.height = 4;
                 labels.width = 4;
                 for (int f : {0, 2}) {
                     std::vector<uint8_t> m(16);
                     for (auto& v : m) v = static_cast<uint8_t>(rng.uniform_int(3));
                     labels.masks[f] = std::move(m);
                 }
                 return grad_check(
                     [labels](const std::vector<Tensor>& in) {
                         return masked_loss(in[0], labels);
                     },
                     {{3, 3, 4, 4}}, {draw(rng, 144, -0.5, 0.5)}, tol);
             }});

    // End-to-end: d(loss)/d(sigma core) through the whole network against
    // finite differences, at a mini configuration.
    reg.add({"medivista_sigma", 1e-4, false, [](uint64_t seed, double tol) {
                 ModelConfig mc;
                 mc.embed_dim = 8;
                 mc.depth = 4;
                 mc.patch_size = 4;
                 mc.num_classes = 2;
                 mc.frames = 3;
                 mc.height = 16;
                 mc.width = 16;
                 mc.fact.rank = 2;
                 mc.adapter_rank = 2;
                 mc.ffm_channels = 4;
                 MediVistaModel model(mc, seed);

                 RngStream rng = RngStream::keyed({seed, 113});
                 Tensor sigma = model.params().get("fact/sigma0_query");
                 for (int64_t i = 0; i < sigma.numel(); ++i) sigma[i] = 0.1 * rng.normal();
                 std::vector<double> vid(static_cast<size_t>(1 * 1 * 3 * 16 * 16));
                 for (double& v : vid) v = rng.uniform();
                 Tensor video = Tensor::from({1, 1, 3, 16, 16}, std::move(vid));

                 model.params().zero_grads();
                 Tensor loss = sum(model.forward(video));
                 backward(loss);
                 const std::vector<double> analytic = sigma.grad();

                 auto loss_value = [&]() {
                     NoGradGuard ng;
                     return sum(model.forward(video))[0];
                 };
                 GradCheckReport report;
                 const double h = 1e-5;
                 for (int64_t i = 0; i < sigma.numel(); ++i) {
                     const double keep = sigma[i];
                     sigma[i] = keep + h;
                     const double lp = loss_value();
                     sigma[i] = keep - h;
                     const double lm = loss_value();
                     sigma[i] = keep;
                     const double fd = (lp - lm) / (2.0 * h);
                     const double err = std::abs(analytic[static_cast<size_t>(i)] - fd) /
                                        std::max({1.0, std::abs(analytic[static_cast<size_t>(i)]),
                                                  std::abs(fd)});
                     report.max_rel_err = std::max(report.max_rel_err, err);
                 }
                 report.pass = report.max_rel_err <= tol;
                 return report;
             }});
}

}  // namespace

void register_all_gradcheck_cases() {
    register_core_gradcheck_cases();
    static bool done = (add_cases(), true);
    (void)done;
}

}  // namespace medivista
