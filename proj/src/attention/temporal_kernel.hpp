#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace medivista {

// Precomputed frame-mixing weights phi(t, tau) for temporal fusion attention.
// Entries with 2*|t - tau| > window are zero; rows optionally rescaled to
// sum 1. Before normalization the matrix is symmetric with unit diagonal.
struct TemporalKernel {
    Tensor weights;  // [T,T] constant
    double sigma = 1.0;
    int window = 5;
    bool normalized = true;
    std::string type = "gaussian";

    int frames() const { return weights.dim(0); }
};

// phi(t,tau) = exp(-(t-tau)^2 / (2 sigma^2))
TemporalKernel gaussian_kernel(int frames, double sigma, int window, bool normalized);

// phi(t,tau) = exp(-|t-tau| / sigma)
TemporalKernel laplacian_kernel(int frames, double sigma, int window, bool normalized);

// Gaussian in time multiplied by a Gaussian over mean frame intensity
// differences (one mean per frame, same sigma for both terms).
TemporalKernel bilateral_kernel(int frames, double sigma, int window, bool normalized,
                                const std::vector<double>& frame_means);

// Keys/values taken from frame 0 only (cross-frame attention analogue used by
// the adapter ablation; not a phi kernel, so the symmetry invariants do not
// apply).
TemporalKernel first_frame_kernel(int frames);

}  // namespace medivista
