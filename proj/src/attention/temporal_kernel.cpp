#include "attention/temporal_kernel.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace medivista {

namespace {

TemporalKernel build(int frames, double sigma, int window, bool normalized,
                     const std::string& type,
                     const std::function<double(int, int)>& phi) {
    if (frames < 1) throw std::invalid_argument("temporal kernel: frames must be >= 1");
    if (window < 1 || window % 2 == 0) {
        throw std::invalid_argument("temporal kernel: window must be a positive odd integer, got " +
                                    std::to_string(window));
    }
    std::vector<double> w(static_cast<size_t>(frames) * frames, 0.0);
    for (int t = 0; t < frames; ++t) {
        double row_sum = 0.0;
        for (int tau = 0; tau < frames; ++tau) {
            if (2 * std::abs(t - tau) > window) continue;
            const double v = phi(t, tau);
            w[static_cast<size_t>(t) * frames + tau] = v;
            row_sum += v;
        }
        if (normalized) {
            for (int tau = 0; tau < frames; ++tau)
                w[static_cast<size_t>(t) * frames + tau] /= row_sum;
        }
    }
    TemporalKernel k;
    k.weights = Tensor::from({frames, frames}, std::move(w));
    k.sigma = sigma;
    k.window = window;
    k.normalized = normalized;
    k.type = type;
    return k;
}

void require_positive_sigma(double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("temporal kernel: sigma must be > 0, got " +
                                    std::to_string(sigma));
    }
}

}  // namespace

TemporalKernel gaussian_kernel(int frames, double sigma, int window, bool normalized) {
    require_positive_sigma(sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return build(frames, sigma, window, normalized, "gaussian", [inv](int t, int tau) {
        const double d = static_cast<double>(t - tau);
        return std::exp(-d * d * inv);
    });
}

TemporalKernel laplacian_kernel(int frames, double sigma, int window, bool normalized) {
    require_positive_sigma(sigma);
    return build(frames, sigma, window, normalized, "laplacian", [sigma](int t, int tau) {
        return std::exp(-std::abs(static_cast<double>(t - tau)) / sigma);
    });
}

TemporalKernel bilateral_kernel(int frames, double sigma, int window, bool normalized,
                                const std::vector<double>& frame_means) {
    require_positive_sigma(sigma);
    if (static_cast<int>(frame_means.size()) != frames) {
        throw std::invalid_argument("bilateral kernel: need one mean intensity per frame");
    }
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return build(frames, sigma, window, normalized, "bilateral",
                 [inv, &frame_means](int t, int tau) {
                     const double dt = static_cast<double>(t - tau);
                     const double di = frame_means[static_cast<size_t>(t)] -
                                       frame_means[static_cast<size_t>(tau)];
                     return std::exp(-dt * dt * inv) * std::exp(-di * di * inv);
                 });
}

TemporalKernel first_frame_kernel(int frames) {
    if (frames < 1) throw std::invalid_argument("temporal kernel: frames must be >= 1");
    std::vector<double> w(static_cast<size_t>(frames) * frames, 0.0);
    for (int t = 0; t < frames; ++t) w[static_cast<size_t>(t) * frames] = 1.0;
    TemporalKernel k;
    k.weights = Tensor::from({frames, frames}, std::move(w));
    k.sigma = 0.0;
    k.window = 2 * frames + 1;
    k.normalized = true;
    k.type = "first_frame";
    return k;
}

}  // namespace medivista
