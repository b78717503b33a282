#include "wavelet/haar.hpp"

#include <algorithm>
#include <stdexcept>

#include "core/ops.hpp"

namespace medivista {

namespace {

// The 2x2 Haar block matrix is symmetric and orthonormal, so the same
// coefficient pattern serves forward, inverse, and both adjoints.
inline void haar_block(double a, double b, double c, double d, double& o0, double& o1,
                       double& o2, double& o3) {
    o0 = 0.5 * (a + b + c + d);
    o1 = 0.5 * (a - b + c - d);
    o2 = 0.5 * (a + b - c - d);
    o3 = 0.5 * (a - b - c + d);
}

}  // namespace

WaveletSubbands haar_dwt2(const Tensor& frame) {
    if (!frame.defined() || frame.ndim() != 3 || frame.numel() == 0) {
        throw std::invalid_argument("haar_dwt2: non-empty [C,H,W] frame expected");
    }
    const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
    const int h2 = (h + 1) / 2, w2 = (w + 1) / 2;
    const int64_t plane = static_cast<int64_t>(h2) * w2;

    // stacked layout: band-major [4, C, H2, W2]
    std::vector<double> out(static_cast<size_t>(4 * c) * plane);
    const double* px = frame.data();
    for (int ch = 0; ch < c; ++ch) {
        const double* src = px + static_cast<int64_t>(ch) * h * w;
        for (int by = 0; by < h2; ++by)
            for (int bx = 0; bx < w2; ++bx) {
                const int y0 = 2 * by, x0 = 2 * bx;
                const int y1 = std::min(y0 + 1, h - 1);  // symmetric pad for odd extents
                const int x1 = std::min(x0 + 1, w - 1);
                double o0, o1, o2, o3;
                haar_block(src[static_cast<int64_t>(y0) * w + x0],
                           src[static_cast<int64_t>(y0) * w + x1],
                           src[static_cast<int64_t>(y1) * w + x0],
                           src[static_cast<int64_t>(y1) * w + x1], o0, o1, o2, o3);
                const int64_t at = static_cast<int64_t>(ch) * plane + by * w2 + bx;
                out[static_cast<size_t>(0 * c * plane + at)] = o0;
                out[static_cast<size_t>(1 * c * plane + at)] = o1;
                out[static_cast<size_t>(2 * c * plane + at)] = o2;
                out[static_cast<size_t>(3 * c * plane + at)] = o3;
            }
    }

    auto fn = frame.node();
    Tensor stacked = make_op(
        "haar_dwt2", {4, c, h2, w2}, std::move(out), {frame},
        [fn, c, h, w, h2, w2, plane](detail::Node& self) {
            if (!fn->requires_grad) return;
            fn->ensure_grad();
            const double* g = self.grad.data();
            double* gx = fn->grad.data();
            for (int ch = 0; ch < c; ++ch) {
                double* dst = gx + static_cast<int64_t>(ch) * h * w;
                for (int by = 0; by < h2; ++by)
                    for (int bx = 0; bx < w2; ++bx) {
                        const int64_t at = static_cast<int64_t>(ch) * plane + by * w2 + bx;
                        double ga, gb, gc, gd;
                        haar_block(g[0 * c * plane + at], g[1 * c * plane + at],
                                   g[2 * c * plane + at], g[3 * c * plane + at], ga, gb, gc, gd);
                        const int y0 = 2 * by, x0 = 2 * bx;
                        const int y1 = std::min(y0 + 1, h - 1);
                        const int x1 = std::min(x0 + 1, w - 1);
                        dst[static_cast<int64_t>(y0) * w + x0] += ga;
                        dst[static_cast<int64_t>(y0) * w + x1] += gb;
                        dst[static_cast<int64_t>(y1) * w + x0] += gc;
                        dst[static_cast<int64_t>(y1) * w + x1] += gd;
                    }
            }
        });

    WaveletSubbands sb;
    sb.orig_h = h;
    sb.orig_w = w;
    const Shape band{c, h2, w2};
    sb.ll = reshape(slice(stacked, 0, 0, 1), band);
    sb.lh = reshape(slice(stacked, 0, 1, 1), band);
    sb.hl = reshape(slice(stacked, 0, 2, 1), band);
    sb.hh = reshape(slice(stacked, 0, 3, 1), band);
    return sb;
}

Tensor haar_idwt2(const WaveletSubbands& sb) {
    const Tensor* bands[4] = {&sb.ll, &sb.lh, &sb.hl, &sb.hh};
    for (const Tensor* b : bands) {
        if (!b->defined() || b->ndim() != 3) {
            throw std::invalid_argument("haar_idwt2: four [C,H2,W2] bands required");
        }
        if (b->shape() != sb.ll.shape()) {
            throw std::invalid_argument("haar_idwt2: band shape mismatch " +
                                        shape_str(b->shape()) + " vs " +
                                        shape_str(sb.ll.shape()));
        }
    }
    const int c = sb.ll.dim(0), h2 = sb.ll.dim(1), w2 = sb.ll.dim(2);
    const int h = sb.orig_h > 0 ? sb.orig_h : 2 * h2;
    const int w = sb.orig_w > 0 ? sb.orig_w : 2 * w2;
    if ((h + 1) / 2 != h2 || (w + 1) / 2 != w2) {
        throw std::invalid_argument("haar_idwt2: bands " + shape_str(sb.ll.shape()) +
                                    " inconsistent with original size");
    }
    const int64_t plane = static_cast<int64_t>(h2) * w2;

    std::vector<double> out(static_cast<size_t>(c) * h * w, 0.0);
    const double* p[4] = {sb.ll.data(), sb.lh.data(), sb.hl.data(), sb.hh.data()};
    for (int ch = 0; ch < c; ++ch) {
        double* dst = out.data() + static_cast<int64_t>(ch) * h * w;
        for (int by = 0; by < h2; ++by)
            for (int bx = 0; bx < w2; ++bx) {
                const int64_t at = static_cast<int64_t>(ch) * plane + by * w2 + bx;
                double a, b, cc, d;
                haar_block(p[0][at], p[1][at], p[2][at], p[3][at], a, b, cc, d);
                const int y0 = 2 * by, x0 = 2 * bx;
                dst[static_cast<int64_t>(y0) * w + x0] = a;
                if (x0 + 1 < w) dst[static_cast<int64_t>(y0) * w + x0 + 1] = b;
                if (y0 + 1 < h) dst[static_cast<int64_t>(y0 + 1) * w + x0] = cc;
                if (y0 + 1 < h && x0 + 1 < w) dst[static_cast<int64_t>(y0 + 1) * w + x0 + 1] = d;
            }
    }

    std::vector<std::shared_ptr<detail::Node>> nodes = {sb.ll.node(), sb.lh.node(),
                                                        sb.hl.node(), sb.hh.node()};
    return make_op(
        "haar_idwt2", {c, h, w}, std::move(out), {sb.ll, sb.lh, sb.hl, sb.hh},
        [nodes, c, h, w, h2, w2, plane](detail::Node& self) {
            bool any = false;
            for (const auto& n : nodes) any = any || n->requires_grad;
            if (!any) return;
            for (const auto& n : nodes)
                if (n->requires_grad) n->ensure_grad();
            const double* g = self.grad.data();
            for (int ch = 0; ch < c; ++ch) {
                const double* gplane = g + static_cast<int64_t>(ch) * h * w;
                for (int by = 0; by < h2; ++by)
                    for (int bx = 0; bx < w2; ++bx) {
                        const int y0 = 2 * by, x0 = 2 * bx;
                        const double ga = gplane[static_cast<int64_t>(y0) * w + x0];
                        const double gb = (x0 + 1 < w) ? gplane[static_cast<int64_t>(y0) * w + x0 + 1] : 0.0;
                        const double gc = (y0 + 1 < h) ? gplane[static_cast<int64_t>(y0 + 1) * w + x0] : 0.0;
                        const double gd = (y0 + 1 < h && x0 + 1 < w)
                                              ? gplane[static_cast<int64_t>(y0 + 1) * w + x0 + 1]
                                              : 0.0;
                        double g0, g1, g2, g3;
                        haar_block(ga, gb, gc, gd, g0, g1, g2, g3);
                        const int64_t at = static_cast<int64_t>(ch) * plane + by * w2 + bx;
                        const double gs[4] = {g0, g1, g2, g3};
                        for (int bidx = 0; bidx < 4; ++bidx)
                            if (nodes[static_cast<size_t>(bidx)]->requires_grad)
                                nodes[static_cast<size_t>(bidx)]->grad[static_cast<size_t>(at)] +=
                                    gs[bidx];
                    }
            }
        });
}

Tensor subbands_channels(const WaveletSubbands& sb) {
    return concat({sb.ll, sb.lh, sb.hl, sb.hh}, 0);
}

}  // namespace medivista
