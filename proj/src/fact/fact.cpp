#include "fact/fact.hpp"

#include <cmath>
#include <stdexcept>

#include "core/ops.hpp"

namespace medivista {

const char* fact_proj_name(FactProj p) {
    return p == FactProj::query ? "query" : "value";
}

const Tensor& FacTFactors::sigma(int layer, FactProj p) const {
    auto it = sigmas.find({layer, static_cast<int>(p)});
    if (it == sigmas.end()) {
        throw std::invalid_argument("fact: no core for layer " + std::to_string(layer) +
                                    " projection " + fact_proj_name(p));
    }
    return it->second;
}

FacTFactors make_fact_factors(int dim, int rank, int layers, bool split_uv, RngStream& rng) {
    if (dim < 1 || rank < 1 || rank > dim) {
        throw std::invalid_argument("fact: need 1 <= rank <= dim, got rank " +
                                    std::to_string(rank) + ", dim " + std::to_string(dim));
    }
    if (layers < 1) throw std::invalid_argument("fact: layers must be >= 1");
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    FacTFactors f;
    f.dim = dim;
    f.rank = rank;
    f.split_uv = split_uv;
    f.u = Tensor::randn({dim, rank}, rng, s);
    f.v = Tensor::randn({dim, rank}, rng, s);
    if (split_uv) {
        f.u_val = Tensor::randn({dim, rank}, rng, s);
        f.v_val = Tensor::randn({dim, rank}, rng, s);
    }
    for (int layer = 0; layer < layers; ++layer) {
        for (FactProj p : {FactProj::query, FactProj::value}) {
            f.sigmas.emplace(std::make_pair(layer, static_cast<int>(p)),
                             Tensor::zeros({rank, rank}));
        }
    }
    return f;
}

Tensor fact_delta(const FacTFactors& f, int layer, FactProj proj) {
    const Tensor& sig = f.sigma(layer, proj);
    return matmul(matmul(f.u_for(proj), sig), transpose(f.v_for(proj)));
}

Tensor fact_apply(const Tensor& w0, const FacTFactors& f, int layer, FactProj proj) {
    if (w0.ndim() != 2 || w0.dim(0) != w0.dim(1) || w0.dim(0) != f.dim) {
        throw std::invalid_argument("fact_apply: base weights " + shape_str(w0.shape()) +
                                    " incompatible with factors of dim " + std::to_string(f.dim));
    }
    return add(w0, fact_delta(f, layer, proj));
}

}  // namespace medivista
