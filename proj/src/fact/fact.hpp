#pragma once

#include <map>
#include <string>
#include <utility>

#include "core/tensor.hpp"

namespace medivista {

enum class FactProj { query = 0, value = 1 };

const char* fact_proj_name(FactProj p);

// Factorized weight increments: shared U, V in R^{d x r} plus one r x r core
// per (layer, projection). The increment for a layer is U Sigma V^T; the
// frozen base weights are never touched. An optional split keeps a separate
// U/V pair for the value projection.
struct FacTFactors {
    int dim = 0;
    int rank = 0;
    bool split_uv = false;
    Tensor u, v;              // query factors; shared with value unless split
    Tensor u_val, v_val;      // only defined when split_uv
    std::map<std::pair<int, int>, Tensor> sigmas;  // (layer, proj) -> [r,r]

    const Tensor& u_for(FactProj p) const {
        return (split_uv && p == FactProj::value) ? u_val : u;
    }
    const Tensor& v_for(FactProj p) const {
        return (split_uv && p == FactProj::value) ? v_val : v;
    }
    const Tensor& sigma(int layer, FactProj p) const;
};

// U, V drawn zero-mean Gaussian scaled by 1/sqrt(d); all cores start at zero
// so the adapted weights coincide with the frozen base until training moves
// them.
FacTFactors make_fact_factors(int dim, int rank, int layers, bool split_uv, RngStream& rng);

// Delta W = U Sigma V^T for one (layer, projection).
Tensor fact_delta(const FacTFactors& f, int layer, FactProj proj);

// W0 + Delta W; W0 must be [d,d] with d matching the factors.
Tensor fact_apply(const Tensor& w0, const FacTFactors& f, int layer, FactProj proj);

}  // namespace medivista
