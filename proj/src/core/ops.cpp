#include "core/ops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace medivista {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<EMat>;
using MapConstMat = Eigen::Map<const EMat>;
using NodePtr = std::shared_ptr<detail::Node>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

// Generic elementwise binary op with per-element partials.
template <typename F, typename DA, typename DB>
Tensor ew_binary(const char* name, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
    require_same_shape(a, b, name);
    const int64_t n = a.numel();
    std::vector<double> out(static_cast<size_t>(n));
    const double* pa = a.data();
    const double* pb = b.data();
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = f(pa[i], pb[i]);
    NodePtr an = a.node(), bn = b.node();
    return make_op(name, a.shape(), std::move(out), {a, b}, [an, bn, da, db](detail::Node& self) {
        const int64_t n = self.numel();
        const double* g = self.grad.data();
        const double* pa = an->value.data();
        const double* pb = bn->value.data();
        if (an->requires_grad) {
            an->ensure_grad();
            double* ga = an->grad.data();
            for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * da(pa[i], pb[i]);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            double* gb = bn->grad.data();
            for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * db(pa[i], pb[i]);
        }
    });
}

// Generic elementwise unary op; dv receives (x, y).
template <typename F, typename D>
Tensor ew_unary(const char* name, const Tensor& a, F f, D dv) {
    const int64_t n = a.numel();
    std::vector<double> out(static_cast<size_t>(n));
    const double* pa = a.data();
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = f(pa[i]);
    NodePtr an = a.node();
    return make_op(name, a.shape(), std::move(out), {a}, [an, dv](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const int64_t n = self.numel();
        const double* g = self.grad.data();
        const double* px = an->value.data();
        const double* py = self.value.data();
        double* ga = an->grad.data();
        for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * dv(px[i], py[i]);
    });
}

struct AxisView {
    int64_t outer, extent, inner;
};

AxisView axis_view(const Shape& s, int axis, const char* op) {
    if (axis < 0 || axis >= static_cast<int>(s.size())) {
        throw std::invalid_argument(std::string(op) + ": axis " + std::to_string(axis) +
                                    " out of range for " + shape_str(s));
    }
    AxisView v{1, s[static_cast<size_t>(axis)], 1};
    for (int i = 0; i < axis; ++i) v.outer *= s[static_cast<size_t>(i)];
    for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) v.inner *= s[i];
    return v;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "div", a, b, [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& a, double c) {
    return ew_unary(
        "scale", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
    return ew_unary(
        "add_scalar", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor scale_by(const Tensor& x, const Tensor& s) {
    if (s.numel() != 1) {
        throw std::invalid_argument("scale_by: scale must be a [1] tensor, got " +
                                    shape_str(s.shape()));
    }
    const double c = s[0];
    const int64_t n = x.numel();
    std::vector<double> out(static_cast<size_t>(n));
    const double* px = x.data();
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = c * px[i];
    NodePtr xn = x.node(), sn = s.node();
    return make_op("scale_by", x.shape(), std::move(out), {x, s}, [xn, sn, c](detail::Node& self) {
        const int64_t n = self.numel();
        const double* g = self.grad.data();
        if (xn->requires_grad) {
            xn->ensure_grad();
            double* gx = xn->grad.data();
            for (int64_t i = 0; i < n; ++i) gx[i] += c * g[i];
        }
        if (sn->requires_grad) {
            sn->ensure_grad();
            const double* px = xn->value.data();
            double dot = 0.0;
            for (int64_t i = 0; i < n; ++i) dot += g[i] * px[i];
            sn->grad[0] += dot;
        }
    });
}

Tensor exp(const Tensor& a) {
    return ew_unary(
        "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return ew_unary(
        "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
    return ew_unary(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; });
}

Tensor gelu(const Tensor& a) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    return ew_unary(
        "gelu", a,
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
        [](double x, double) {
            return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) +
                   x * inv_sqrt2pi * std::exp(-0.5 * x * x);
        });
}

Tensor add_bcast(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sb.size() > sa.size() ||
        !std::equal(sb.begin(), sb.end(), sa.end() - static_cast<long>(sb.size()))) {
        throw std::invalid_argument("add_bcast: " + shape_str(sb) + " is not a suffix of " +
                                    shape_str(sa));
    }
    const int64_t nb = b.numel();
    const int64_t lead = a.numel() / nb;
    std::vector<double> out(static_cast<size_t>(a.numel()));
    const double* pa = a.data();
    const double* pb = b.data();
    for (int64_t l = 0; l < lead; ++l)
        for (int64_t j = 0; j < nb; ++j) out[static_cast<size_t>(l * nb + j)] = pa[l * nb + j] + pb[j];
    NodePtr an = a.node(), bnode = b.node();
    return make_op("add_bcast", a.shape(), std::move(out), {a, b},
                   [an, bnode, lead, nb](detail::Node& self) {
                       const double* g = self.grad.data();
                       if (an->requires_grad) accumulate_grad(*an, g, self.numel());
                       if (bnode->requires_grad) {
                           bnode->ensure_grad();
                           double* gb = bnode->grad.data();
                           for (int64_t l = 0; l < lead; ++l)
                               for (int64_t j = 0; j < nb; ++j) gb[j] += g[l * nb + j];
                       }
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
    }
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<size_t>(m) * n);
    MapMat(out.data(), m, n).noalias() =
        MapConstMat(a.data(), m, k) * MapConstMat(b.data(), k, n);
    NodePtr an = a.node(), bn = b.node();
    return make_op("matmul", {m, n}, std::move(out), {a, b},
                   [an, bn, m, k, n](detail::Node& self) {
                       MapConstMat gc(self.grad.data(), m, n);
                       if (an->requires_grad) {
                           an->ensure_grad();
                           MapMat(an->grad.data(), m, k).noalias() +=
                               gc * MapConstMat(bn->value.data(), k, n).transpose();
                       }
                       if (bn->requires_grad) {
                           bn->ensure_grad();
                           MapMat(bn->grad.data(), k, n).noalias() +=
                               MapConstMat(an->value.data(), m, k).transpose() * gc;
                       }
                   });
}

Tensor transpose(const Tensor& a) {
    if (a.ndim() != 2) throw std::invalid_argument("transpose: rank-2 expected, got " + shape_str(a.shape()));
    const int m = a.dim(0), n = a.dim(1);
    std::vector<double> out(static_cast<size_t>(m) * n);
    const double* pa = a.data();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(j) * m + i] = pa[static_cast<int64_t>(i) * n + j];
    NodePtr an = a.node();
    return make_op("transpose", {n, m}, std::move(out), {a}, [an, m, n](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double* g = self.grad.data();
        double* ga = an->grad.data();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i) ga[static_cast<int64_t>(i) * n + j] += g[static_cast<int64_t>(j) * m + i];
    });
}

Tensor swap01(const Tensor& a) {
    if (a.ndim() != 3) throw std::invalid_argument("swap01: rank-3 expected, got " + shape_str(a.shape()));
    const int d0 = a.dim(0), d1 = a.dim(1), d2 = a.dim(2);
    std::vector<double> out(static_cast<size_t>(a.numel()));
    const double* pa = a.data();
    for (int i = 0; i < d0; ++i)
        for (int j = 0; j < d1; ++j)
            for (int k = 0; k < d2; ++k)
                out[(static_cast<size_t>(j) * d0 + i) * d2 + k] =
                    pa[(static_cast<int64_t>(i) * d1 + j) * d2 + k];
    NodePtr an = a.node();
    return make_op("swap01", {d1, d0, d2}, std::move(out), {a},
                   [an, d0, d1, d2](detail::Node& self) {
                       if (!an->requires_grad) return;
                       an->ensure_grad();
                       const double* g = self.grad.data();
                       double* ga = an->grad.data();
                       for (int j = 0; j < d1; ++j)
                           for (int i = 0; i < d0; ++i)
                               for (int k = 0; k < d2; ++k)
                                   ga[(static_cast<int64_t>(i) * d1 + j) * d2 + k] +=
                                       g[(static_cast<int64_t>(j) * d0 + i) * d2 + k];
                   });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
    if (shape_numel(shape) != a.numel()) {
        throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                    shape_str(shape));
    }
    NodePtr an = a.node();
    return make_op("reshape", shape, a.values(), {a}, [an](detail::Node& self) {
        accumulate_grad(*an, self.grad.data(), self.numel());
    });
}

Tensor slice(const Tensor& a, int axis, int start, int len) {
    AxisView v = axis_view(a.shape(), axis, "slice");
    if (start < 0 || len <= 0 || start + len > v.extent) {
        throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                    std::to_string(start + len) + ") invalid for axis extent " +
                                    std::to_string(v.extent));
    }
    Shape out_shape = a.shape();
    out_shape[static_cast<size_t>(axis)] = len;
    std::vector<double> out(static_cast<size_t>(v.outer * len * v.inner));
    const double* pa = a.data();
    for (int64_t o = 0; o < v.outer; ++o)
        for (int64_t i = 0; i < len; ++i)
            std::copy_n(pa + (o * v.extent + start + i) * v.inner, v.inner,
                        out.data() + (o * len + i) * v.inner);
    NodePtr an = a.node();
    return make_op("slice", out_shape, std::move(out), {a},
                   [an, v, start, len](detail::Node& self) {
                       if (!an->requires_grad) return;
                       an->ensure_grad();
                       const double* g = self.grad.data();
                       double* ga = an->grad.data();
                       for (int64_t o = 0; o < v.outer; ++o)
                           for (int64_t i = 0; i < len; ++i) {
                               const double* src = g + (o * len + i) * v.inner;
                               double* dst = ga + (o * v.extent + start + i) * v.inner;
                               for (int64_t j = 0; j < v.inner; ++j) dst[j] += src[j];
                           }
                   });
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
    if (xs.empty()) throw std::invalid_argument("concat: no inputs");
    Shape out_shape = xs[0].shape();
    AxisView v0 = axis_view(out_shape, axis, "concat");
    int64_t total = 0;
    for (const Tensor& x : xs) {
        Shape s = x.shape();
        s[static_cast<size_t>(axis)] = out_shape[static_cast<size_t>(axis)];
        if (s != out_shape) {
            throw std::invalid_argument("concat: incompatible input " + shape_str(x.shape()) +
                                        " vs " + shape_str(xs[0].shape()));
        }
        total += x.dim(axis);
    }
    out_shape[static_cast<size_t>(axis)] = static_cast<int>(total);
    std::vector<double> out(static_cast<size_t>(v0.outer * total * v0.inner));
    int64_t off = 0;
    for (const Tensor& x : xs) {
        const int64_t e = x.dim(axis);
        const double* px = x.data();
        for (int64_t o = 0; o < v0.outer; ++o)
            std::copy_n(px + o * e * v0.inner, e * v0.inner,
                        out.data() + (o * total + off) * v0.inner);
        off += e;
    }
    std::vector<NodePtr> nodes;
    std::vector<int64_t> extents;
    for (const Tensor& x : xs) {
        nodes.push_back(x.node());
        extents.push_back(x.dim(axis));
    }
    return make_op("concat", out_shape, std::move(out), xs,
                   [nodes, extents, v0, total](detail::Node& self) {
                       const double* g = self.grad.data();
                       int64_t off = 0;
                       for (size_t idx = 0; idx < nodes.size(); ++idx) {
                           const int64_t e = extents[idx];
                           detail::Node& p = *nodes[idx];
                           if (p.requires_grad) {
                               p.ensure_grad();
                               double* gp = p.grad.data();
                               for (int64_t o = 0; o < v0.outer; ++o) {
                                   const double* src = g + (o * total + off) * v0.inner;
                                   double* dst = gp + o * e * v0.inner;
                                   for (int64_t j = 0; j < e * v0.inner; ++j) dst[j] += src[j];
                               }
                           }
                           off += e;
                       }
                   });
}

Tensor stack0(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw std::invalid_argument("stack0: no inputs");
    std::vector<Tensor> rows;
    rows.reserve(xs.size());
    for (const Tensor& x : xs) {
        Shape s = x.shape();
        s.insert(s.begin(), 1);
        rows.push_back(reshape(x, s));
    }
    return concat(rows, 0);
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    const double* pa = a.data();
    for (int64_t i = 0; i < a.numel(); ++i) s += pa[i];
    NodePtr an = a.node();
    return make_op("sum", {1}, {s}, {a}, [an](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double g = self.grad[0];
        for (double& v : an->grad) v += g;
    });
}

Tensor mean(const Tensor& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor softmax(const Tensor& a, int axis) {
    AxisView v = axis_view(a.shape(), axis, "softmax");
    std::vector<double> out(static_cast<size_t>(a.numel()));
    const double* pa = a.data();
    for (int64_t o = 0; o < v.outer; ++o)
        for (int64_t in = 0; in < v.inner; ++in) {
            const int64_t base = o * v.extent * v.inner + in;
            double mx = pa[base];
            for (int64_t i = 1; i < v.extent; ++i) mx = std::max(mx, pa[base + i * v.inner]);
            double z = 0.0;
            for (int64_t i = 0; i < v.extent; ++i) {
                const double e = std::exp(pa[base + i * v.inner] - mx);
                out[static_cast<size_t>(base + i * v.inner)] = e;
                z += e;
            }
            for (int64_t i = 0; i < v.extent; ++i) out[static_cast<size_t>(base + i * v.inner)] /= z;
        }
    NodePtr an = a.node();
    return make_op("softmax", a.shape(), std::move(out), {a}, [an, v](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double* g = self.grad.data();
        const double* y = self.value.data();
        double* ga = an->grad.data();
        for (int64_t o = 0; o < v.outer; ++o)
            for (int64_t in = 0; in < v.inner; ++in) {
                const int64_t base = o * v.extent * v.inner + in;
                double dot = 0.0;
                for (int64_t i = 0; i < v.extent; ++i) {
                    const int64_t at = base + i * v.inner;
                    dot += g[at] * y[at];
                }
                for (int64_t i = 0; i < v.extent; ++i) {
                    const int64_t at = base + i * v.inner;
                    ga[at] += y[at] * (g[at] - dot);
                }
            }
    });
}

Tensor log_softmax(const Tensor& a, int axis) {
    AxisView v = axis_view(a.shape(), axis, "log_softmax");
    std::vector<double> out(static_cast<size_t>(a.numel()));
    const double* pa = a.data();
    for (int64_t o = 0; o < v.outer; ++o)
        for (int64_t in = 0; in < v.inner; ++in) {
            const int64_t base = o * v.extent * v.inner + in;
            double mx = pa[base];
            for (int64_t i = 1; i < v.extent; ++i) mx = std::max(mx, pa[base + i * v.inner]);
            double z = 0.0;
            for (int64_t i = 0; i < v.extent; ++i) z += std::exp(pa[base + i * v.inner] - mx);
            const double lse = mx + std::log(z);
            for (int64_t i = 0; i < v.extent; ++i)
                out[static_cast<size_t>(base + i * v.inner)] = pa[base + i * v.inner] - lse;
        }
    NodePtr an = a.node();
    return make_op("log_softmax", a.shape(), std::move(out), {a}, [an, v](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double* g = self.grad.data();
        const double* y = self.value.data();  // log-probs
        double* ga = an->grad.data();
        for (int64_t o = 0; o < v.outer; ++o)
            for (int64_t in = 0; in < v.inner; ++in) {
                const int64_t base = o * v.extent * v.inner + in;
                double gsum = 0.0;
                for (int64_t i = 0; i < v.extent; ++i) gsum += g[base + i * v.inner];
                for (int64_t i = 0; i < v.extent; ++i) {
                    const int64_t at = base + i * v.inner;
                    ga[at] += g[at] - std::exp(y[at]) * gsum;
                }
            }
    });
}

Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta, double eps) {
    const int d = a.dim(a.ndim() - 1);
    if (gamma.ndim() != 1 || gamma.dim(0) != d || beta.ndim() != 1 || beta.dim(0) != d) {
        throw std::invalid_argument("layer_norm: gamma/beta must be rank-1 of extent " +
                                    std::to_string(d));
    }
    const int64_t rows = a.numel() / d;
    std::vector<double> out(static_cast<size_t>(a.numel()));
    std::vector<double> xhat(static_cast<size_t>(a.numel()));
    std::vector<double> inv_std(static_cast<size_t>(rows));
    const double* pa = a.data();
    const double* pg = gamma.data();
    const double* pb = beta.data();
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = pa + r * d;
        double mu = 0.0;
        for (int i = 0; i < d; ++i) mu += x[i];
        mu /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) var += (x[i] - mu) * (x[i] - mu);
        var /= d;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[static_cast<size_t>(r)] = inv;
        for (int i = 0; i < d; ++i) {
            const double h = (x[i] - mu) * inv;
            xhat[static_cast<size_t>(r * d + i)] = h;
            out[static_cast<size_t>(r * d + i)] = h * pg[i] + pb[i];
        }
    }
    NodePtr an = a.node(), gn = gamma.node(), bn = beta.node();
    return make_op("layer_norm", a.shape(), std::move(out), {a, gamma, beta},
                   [an, gn, bn, rows, d, xhat = std::move(xhat),
                    inv_std = std::move(inv_std)](detail::Node& self) {
                       const double* g = self.grad.data();
                       const double* pg = gn->value.data();
                       if (gn->requires_grad) {
                           gn->ensure_grad();
                           double* gg = gn->grad.data();
                           for (int64_t r = 0; r < rows; ++r)
                               for (int i = 0; i < d; ++i)
                                   gg[i] += g[r * d + i] * xhat[static_cast<size_t>(r * d + i)];
                       }
                       if (bn->requires_grad) {
                           bn->ensure_grad();
                           double* gb = bn->grad.data();
                           for (int64_t r = 0; r < rows; ++r)
                               for (int i = 0; i < d; ++i) gb[i] += g[r * d + i];
                       }
                       if (an->requires_grad) {
                           an->ensure_grad();
                           double* ga = an->grad.data();
                           for (int64_t r = 0; r < rows; ++r) {
                               const double* gr = g + r * d;
                               const double* hr = xhat.data() + r * d;
                               double m1 = 0.0, m2 = 0.0;
                               for (int i = 0; i < d; ++i) {
                                   const double dh = gr[i] * pg[i];
                                   m1 += dh;
                                   m2 += dh * hr[i];
                               }
                               m1 /= d;
                               m2 /= d;
                               const double inv = inv_std[static_cast<size_t>(r)];
                               for (int i = 0; i < d; ++i) {
                                   const double dh = gr[i] * pg[i];
                                   ga[r * d + i] += inv * (dh - m1 - hr[i] * m2);
                               }
                           }
                       }
                   });
}

Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad) {
    if (x.ndim() != 3 || w.ndim() != 4 || x.dim(0) != w.dim(1)) {
        throw std::invalid_argument("conv2d: expected x[C,H,W], w[Cout,C,kh,kw]; got " +
                                    shape_str(x.shape()) + " and " + shape_str(w.shape()));
    }
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    const int cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int ho = (h + 2 * pad - kh) / stride + 1;
    const int wo = (wd + 2 * pad - kw) / stride + 1;
    if (ho <= 0 || wo <= 0) {
        throw std::invalid_argument("conv2d: kernel " + shape_str(w.shape()) +
                                    " does not fit input " + shape_str(x.shape()));
    }
    const int64_t kdim = static_cast<int64_t>(cin) * kh * kw;
    const int64_t npos = static_cast<int64_t>(ho) * wo;

    // im2col; kept alive for the weight-gradient GEMM in backward
    auto cols = std::make_shared<std::vector<double>>(static_cast<size_t>(kdim * npos), 0.0);
    const double* px = x.data();
    for (int c = 0; c < cin; ++c)
        for (int dy = 0; dy < kh; ++dy)
            for (int dx = 0; dx < kw; ++dx) {
                const int64_t krow = (static_cast<int64_t>(c) * kh + dy) * kw + dx;
                double* dst = cols->data() + krow * npos;
                for (int oy = 0; oy < ho; ++oy) {
                    const int sy = oy * stride + dy - pad;
                    if (sy < 0 || sy >= h) continue;
                    const double* src = px + (static_cast<int64_t>(c) * h + sy) * wd;
                    for (int ox = 0; ox < wo; ++ox) {
                        const int sx = ox * stride + dx - pad;
                        if (sx >= 0 && sx < wd) dst[static_cast<int64_t>(oy) * wo + ox] = src[sx];
                    }
                }
            }

    std::vector<double> out(static_cast<size_t>(cout) * npos);
    MapMat(out.data(), cout, npos).noalias() =
        MapConstMat(w.data(), cout, kdim) * MapConstMat(cols->data(), kdim, npos);

    NodePtr xn = x.node(), wn = w.node();
    return make_op(
        "conv2d", {cout, ho, wo}, std::move(out), {x, w},
        [xn, wn, cols, cin, h, wd, cout, kh, kw, ho, wo, stride, pad, kdim,
         npos](detail::Node& self) {
            MapConstMat gy(self.grad.data(), cout, npos);
            if (wn->requires_grad) {
                wn->ensure_grad();
                MapMat(wn->grad.data(), cout, kdim).noalias() +=
                    gy * MapConstMat(cols->data(), kdim, npos).transpose();
            }
            if (xn->requires_grad) {
                xn->ensure_grad();
                std::vector<double> gcols(static_cast<size_t>(kdim * npos));
                MapMat(gcols.data(), kdim, npos).noalias() =
                    MapConstMat(wn->value.data(), cout, kdim).transpose() * gy;
                double* gx = xn->grad.data();
                for (int c = 0; c < cin; ++c)
                    for (int dy = 0; dy < kh; ++dy)
                        for (int dx = 0; dx < kw; ++dx) {
                            const int64_t krow = (static_cast<int64_t>(c) * kh + dy) * kw + dx;
                            const double* src = gcols.data() + krow * npos;
                            for (int oy = 0; oy < ho; ++oy) {
                                const int sy = oy * stride + dy - pad;
                                if (sy < 0 || sy >= h) continue;
                                double* dst = gx + (static_cast<int64_t>(c) * h + sy) * wd;
                                for (int ox = 0; ox < wo; ++ox) {
                                    const int sx = ox * stride + dx - pad;
                                    if (sx >= 0 && sx < wd)
                                        dst[sx] += src[static_cast<int64_t>(oy) * wo + ox];
                                }
                            }
                        }
            }
        });
}

Tensor bilinear_up2(const Tensor& x) {
    if (x.ndim() != 3) throw std::invalid_argument("bilinear_up2: rank-3 [C,H,W] expected, got " + shape_str(x.shape()));
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int ho = 2 * h, wo = 2 * w;

    // Source taps for one output axis position (align_corners = false).
    auto taps = [](int o, int extent, int& lo, int& hi, double& wlo) {
        const double s = (o + 0.5) * 0.5 - 0.5;
        double fl = std::floor(s);
        lo = static_cast<int>(fl);
        hi = lo + 1;
        const double frac = s - fl;
        wlo = 1.0 - frac;
        lo = std::clamp(lo, 0, extent - 1);
        hi = std::clamp(hi, 0, extent - 1);
    };

    std::vector<double> out(static_cast<size_t>(c) * ho * wo);
    const double* px = x.data();
    for (int ch = 0; ch < c; ++ch) {
        const double* plane = px + static_cast<int64_t>(ch) * h * w;
        double* oplane = out.data() + static_cast<int64_t>(ch) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
            int y0, y1;
            double wy;
            taps(oy, h, y0, y1, wy);
            for (int ox = 0; ox < wo; ++ox) {
                int x0, x1;
                double wx;
                taps(ox, w, x0, x1, wx);
                oplane[static_cast<int64_t>(oy) * wo + ox] =
                    wy * (wx * plane[static_cast<int64_t>(y0) * w + x0] +
                          (1 - wx) * plane[static_cast<int64_t>(y0) * w + x1]) +
                    (1 - wy) * (wx * plane[static_cast<int64_t>(y1) * w + x0] +
                                (1 - wx) * plane[static_cast<int64_t>(y1) * w + x1]);
            }
        }
    }
    NodePtr xn = x.node();
    return make_op("bilinear_up2", {c, ho, wo}, std::move(out), {x},
                   [xn, c, h, w, ho, wo, taps](detail::Node& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       const double* g = self.grad.data();
                       double* gx = xn->grad.data();
                       for (int ch = 0; ch < c; ++ch) {
                           double* gplane = gx + static_cast<int64_t>(ch) * h * w;
                           const double* oplane = g + static_cast<int64_t>(ch) * ho * wo;
                           for (int oy = 0; oy < ho; ++oy) {
                               int y0, y1;
                               double wy;
                               taps(oy, h, y0, y1, wy);
                               for (int ox = 0; ox < wo; ++ox) {
                                   int x0, x1;
                                   double wx;
                                   taps(ox, w, x0, x1, wx);
                                   const double gv = oplane[static_cast<int64_t>(oy) * wo + ox];
                                   gplane[static_cast<int64_t>(y0) * w + x0] += gv * wy * wx;
                                   gplane[static_cast<int64_t>(y0) * w + x1] += gv * wy * (1 - wx);
                                   gplane[static_cast<int64_t>(y1) * w + x0] += gv * (1 - wy) * wx;
                                   gplane[static_cast<int64_t>(y1) * w + x1] += gv * (1 - wy) * (1 - wx);
                               }
                           }
                       }
                   });
}

Tensor extract_patches(const Tensor& x, int patch) {
    if (x.ndim() != 3) throw std::invalid_argument("extract_patches: rank-3 [C,H,W] expected");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    if (patch <= 0 || h % patch != 0 || w % patch != 0) {
        throw std::invalid_argument("extract_patches: dims " + shape_str(x.shape()) +
                                    " not divisible by patch " + std::to_string(patch));
    }
    const int gh = h / patch, gw = w / patch;
    const int n = gh * gw;
    const int pd = patch * patch * c;
    std::vector<double> out(static_cast<size_t>(n) * pd);
    const double* px = x.data();
    for (int py = 0; py < gh; ++py)
        for (int pxi = 0; pxi < gw; ++pxi) {
            double* row = out.data() + (static_cast<int64_t>(py) * gw + pxi) * pd;
            for (int ch = 0; ch < c; ++ch)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        row[(static_cast<int64_t>(ch) * patch + dy) * patch + dx] =
                            px[(static_cast<int64_t>(ch) * h + py * patch + dy) * w + pxi * patch + dx];
        }
    NodePtr xn = x.node();
    return make_op("extract_patches", {n, pd}, std::move(out), {x},
                   [xn, c, h, w, patch, gh, gw, pd](detail::Node& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       const double* g = self.grad.data();
                       double* gx = xn->grad.data();
                       for (int py = 0; py < gh; ++py)
                           for (int pxi = 0; pxi < gw; ++pxi) {
                               const double* row = g + (static_cast<int64_t>(py) * gw + pxi) * pd;
                               for (int ch = 0; ch < c; ++ch)
                                   for (int dy = 0; dy < patch; ++dy)
                                       for (int dx = 0; dx < patch; ++dx)
                                           gx[(static_cast<int64_t>(ch) * h + py * patch + dy) * w +
                                              pxi * patch + dx] +=
                                               row[(static_cast<int64_t>(ch) * patch + dy) * patch + dx];
                           }
                   });
}

}  // namespace medivista
