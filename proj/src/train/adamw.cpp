#include "train/adamw.hpp"

#include <cmath>

namespace medivista {

AdamW::AdamW(std::vector<Tensor> params, Hyper hyper)
    : params_(std::move(params)), hyper_(hyper) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
        v_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
    }
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        const int64_t n = p.numel();
        const bool has_grad = p.has_grad();
        const double* g = has_grad ? p.grad().data() : nullptr;
        double* value = p.data();
        double* m = m_[i].data();
        double* v = v_[i].data();
        for (int64_t j = 0; j < n; ++j) {
            const double gj = has_grad ? g[j] : 0.0;
            m[j] = hyper_.beta1 * m[j] + (1.0 - hyper_.beta1) * gj;
            v[j] = hyper_.beta2 * v[j] + (1.0 - hyper_.beta2) * gj * gj;
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            value[j] -= hyper_.lr * (m_hat / (std::sqrt(v_hat) + hyper_.eps) +
                                     hyper_.weight_decay * value[j]);
        }
    }
}

void AdamW::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace medivista
