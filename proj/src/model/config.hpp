#pragma once

#include <string>

#include <json.hpp>

namespace medivista {

struct KernelConfig {
    std::string type = "gaussian";  // gaussian | laplacian | bilateral
    double sigma = 1.0;
    int window = 5;
    bool normalized = true;
};

struct FactConfig {
    bool enabled = true;
    int rank = 4;
    bool split_uv = false;
};

// Network hyperparameters. The toy defaults keep a CPU forward pass cheap
// enough for finite-difference checks.
struct ModelConfig {
    int embed_dim = 32;
    int depth = 4;  // transformer blocks; must be divisible by 4 (four stages)
    int patch_size = 8;
    int num_classes = 3;
    int frames = 8;
    int height = 64;
    int width = 64;
    int heads = 1;
    int mlp_ratio = 4;
    KernelConfig kernel;
    FactConfig fact;
    bool ffm_enabled = true;
    std::string ffm_transform = "wavelet";  // wavelet | fourier | none
    int ffm_channels = 8;
    std::string attention_order = "temporal_first";  // temporal_first | spatial_first | spatial_only
    std::string temporal_mode = "fusion";  // fusion | plain | conv | first_frame
    bool multiscale_fusion = true;
    int adapter_rank = 4;  // low-rank adapter projections; 0 = dense

    int grid_h() const { return height / patch_size; }
    int grid_w() const { return width / patch_size; }
    int tokens() const { return grid_h() * grid_w(); }

    void validate() const;
};

struct AugmentConfig {
    bool flip = true;
    bool scale = true;
    bool contrast = true;
};

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 0.01;
    int epochs = 30;
    int pretrain_epochs = 0;  // full-network warmup before the backbone freeze
    int batch_size = 4;
    int clip_len = 8;  // paper-scale sampling uses 32; toy clips are one cycle
    AugmentConfig augment;
    uint64_t seed = 1234;

    void validate() const;
};

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

// Strict JSON bindings: unknown keys are rejected.
void from_json_strict(const nlohmann::json& j, ModelConfig& cfg);
void from_json_strict(const nlohmann::json& j, TrainConfig& cfg);
void from_json_strict(const nlohmann::json& j, RunConfig& cfg);
nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);
// "section.key=value" override applied onto the JSON form.
void apply_override(nlohmann::json& j, const std::string& spec);

}  // namespace medivista
