#pragma once

#include <optional>
#include <vector>

#include "attention/attention.hpp"
#include "fact/fact.hpp"
#include "model/config.hpp"
#include "model/params.hpp"

namespace medivista {

// Transformer encoder with temporal-fusion adapters and frequency-feature
// injection, plus the four-stage progressive mask decoder.
class MediVistaModel {
public:
    enum class Phase { pretrain, adapt };

    MediVistaModel(const ModelConfig& cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    FacTFactors& fact() { return fact_; }
    const FacTFactors& fact() const { return fact_; }

    // pretrain: full network trains (cores excluded, they stay zero).
    // adapt:    backbone frozen; adapters, FFM, decoder and factors train.
    void set_phase(Phase phase);
    Phase phase() const { return phase_; }

    // video [B,C,T,H,W] in [0,1] -> logits [B,classes,T,H,W]
    Tensor forward(const Tensor& video) const;

    // Pieces, exposed for direct testing. Per-sample (no batch axis).
    Tensor patch_embed(const Tensor& video) const;  // [C,T,H,W] -> [T,N,d]
    std::vector<Tensor> ffm_branch(const Tensor& frame) const;  // [C,H,W] -> 4 maps
    std::vector<Tensor> encoder_forward(const Tensor& video) const;  // 4 stage outputs [T,N,d]
    Tensor decoder_forward(const std::vector<Tensor>& stages) const;  // [classes,T,H,W]

private:
    Tensor forward_one(const Tensor& video) const;  // [C,T,H,W]
    AttentionWeights adapter_weights(int block) const;
    AttentionWeights spatial_weights(int block) const;
    AttentionWeights cba_weights() const;
    Tensor low_rank_or_dense(const std::string& a, const std::string& b,
                             const std::string& dense) const;
    TemporalKernel kernel_for(const Tensor& video) const;
    Tensor apply_block(int block, Tensor x, const TemporalKernel& kernel) const;
    Tensor adapter_update(int block, const Tensor& x, const TemporalKernel& kernel) const;
    std::vector<std::vector<Tensor>> ffm_tokens(const Tensor& video) const;  // [T][stage]

    ModelConfig cfg_;
    ParamStore params_;
    FacTFactors fact_;
    Phase phase_ = Phase::adapt;
    std::vector<int> up_factors_;  // per decoder step, product equals patch_size
};

// Assembles the model and runs the full pipeline once (shape/testing helper).
Tensor medivista_forward(const Tensor& video, const MediVistaModel& model);

}  // namespace medivista
