#pragma once

#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace medivista {

// Adaptive moments with decoupled weight decay:
//   p -= lr * ( m_hat / (sqrt(v_hat) + eps) + weight_decay * p )
// A step with zero gradient and zero decay leaves parameters unchanged.
class AdamW {
public:
    struct Hyper {
        double lr = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.01;
    };

    AdamW(std::vector<Tensor> params, Hyper hyper);

    void step();
    void zero_grad();
    int64_t steps() const { return t_; }
    const Hyper& hyper() const { return hyper_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    Hyper hyper_;
    int64_t t_ = 0;
};

}  // namespace medivista
