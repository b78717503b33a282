#include "model/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace medivista {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void ModelConfig::validate() const {
    if (depth < 4 || depth % 4 != 0) {
        throw std::invalid_argument("model config: depth must be a positive multiple of 4, got " +
                                    std::to_string(depth));
    }
    if (patch_size < 1 || height % patch_size != 0 || width % patch_size != 0) {
        throw std::invalid_argument("model config: image " + std::to_string(height) + "x" +
                                    std::to_string(width) + " not divisible by patch size " +
                                    std::to_string(patch_size));
    }
    if (embed_dim < 1 || heads < 1 || embed_dim % heads != 0) {
        throw std::invalid_argument("model config: heads must divide embed_dim");
    }
    if (num_classes < 2) throw std::invalid_argument("model config: need at least 2 classes");
    if (frames < 1) throw std::invalid_argument("model config: frames must be >= 1");
    if (embed_dim % 8 != 0) {
        throw std::invalid_argument("model config: embed_dim must be divisible by 8 for the decoder widths");
    }
    if (fact.enabled && (fact.rank < 1 || fact.rank > embed_dim)) {
        throw std::invalid_argument("model config: fact rank must satisfy 1 <= r <= d");
    }
    if (kernel.type != "gaussian" && kernel.type != "laplacian" && kernel.type != "bilateral") {
        throw std::invalid_argument("model config: unknown kernel type '" + kernel.type + "'");
    }
    if (ffm_transform != "wavelet" && ffm_transform != "fourier" && ffm_transform != "none") {
        throw std::invalid_argument("model config: unknown ffm transform '" + ffm_transform + "'");
    }
    if (attention_order != "temporal_first" && attention_order != "spatial_first" &&
        attention_order != "spatial_only") {
        throw std::invalid_argument("model config: unknown attention order '" + attention_order + "'");
    }
    if (temporal_mode != "fusion" && temporal_mode != "plain" && temporal_mode != "conv" &&
        temporal_mode != "first_frame") {
        throw std::invalid_argument("model config: unknown temporal mode '" + temporal_mode + "'");
    }
    if (adapter_rank < 0 || adapter_rank > embed_dim) {
        throw std::invalid_argument("model config: adapter_rank must be in [0, embed_dim]");
    }
    if (height % 2 != 0 || width % 2 != 0) {
        throw std::invalid_argument("model config: height and width must be even");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("train config: weight_decay must be >= 0");
    if (clip_len < 2) throw std::invalid_argument("train config: clip length must be >= 2");
    if (epochs < 0 || pretrain_epochs < 0) throw std::invalid_argument("train config: negative epochs");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
}

void from_json_strict(const json& j, ModelConfig& cfg) {
    reject_unknown(j, {"embed_dim", "depth", "patch_size", "num_classes", "frames", "height",
                       "width", "heads", "mlp_ratio", "kernel", "fact", "ffm_enabled",
                       "ffm_transform", "ffm_channels", "attention_order", "temporal_mode",
                       "multiscale_fusion", "adapter_rank"},
                   "model");
    get_if(j, "embed_dim", cfg.embed_dim);
    get_if(j, "depth", cfg.depth);
    get_if(j, "patch_size", cfg.patch_size);
    get_if(j, "num_classes", cfg.num_classes);
    get_if(j, "frames", cfg.frames);
    get_if(j, "height", cfg.height);
    get_if(j, "width", cfg.width);
    get_if(j, "heads", cfg.heads);
    get_if(j, "mlp_ratio", cfg.mlp_ratio);
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        reject_unknown(k, {"type", "sigma", "window", "normalized"}, "model.kernel");
        get_if(k, "type", cfg.kernel.type);
        get_if(k, "sigma", cfg.kernel.sigma);
        get_if(k, "window", cfg.kernel.window);
        get_if(k, "normalized", cfg.kernel.normalized);
    }
    if (j.contains("fact")) {
        const json& f = j.at("fact");
        reject_unknown(f, {"enabled", "rank", "split_uv"}, "model.fact");
        get_if(f, "enabled", cfg.fact.enabled);
        get_if(f, "rank", cfg.fact.rank);
        get_if(f, "split_uv", cfg.fact.split_uv);
    }
    get_if(j, "ffm_enabled", cfg.ffm_enabled);
    get_if(j, "ffm_transform", cfg.ffm_transform);
    get_if(j, "ffm_channels", cfg.ffm_channels);
    get_if(j, "attention_order", cfg.attention_order);
    get_if(j, "temporal_mode", cfg.temporal_mode);
    get_if(j, "multiscale_fusion", cfg.multiscale_fusion);
    get_if(j, "adapter_rank", cfg.adapter_rank);
    cfg.validate();
}

void from_json_strict(const json& j, TrainConfig& cfg) {
    reject_unknown(j, {"learning_rate", "weight_decay", "epochs", "pretrain_epochs", "batch_size",
                       "clip_len", "augment", "seed"},
                   "train");
    get_if(j, "learning_rate", cfg.learning_rate);
    get_if(j, "weight_decay", cfg.weight_decay);
    get_if(j, "epochs", cfg.epochs);
    get_if(j, "pretrain_epochs", cfg.pretrain_epochs);
    get_if(j, "batch_size", cfg.batch_size);
    get_if(j, "clip_len", cfg.clip_len);
    if (j.contains("augment")) {
        const json& a = j.at("augment");
        reject_unknown(a, {"flip", "scale", "contrast"}, "train.augment");
        get_if(a, "flip", cfg.augment.flip);
        get_if(a, "scale", cfg.augment.scale);
        get_if(a, "contrast", cfg.augment.contrast);
    }
    get_if(j, "seed", cfg.seed);
    cfg.validate();
}

void from_json_strict(const json& j, RunConfig& cfg) {
    reject_unknown(j, {"model", "train"}, "run config");
    if (j.contains("model")) from_json_strict(j.at("model"), cfg.model);
    if (j.contains("train")) from_json_strict(j.at("train"), cfg.train);
}

json to_json(const ModelConfig& cfg) {
    return json{{"embed_dim", cfg.embed_dim},
                {"depth", cfg.depth},
                {"patch_size", cfg.patch_size},
                {"num_classes", cfg.num_classes},
                {"frames", cfg.frames},
                {"height", cfg.height},
                {"width", cfg.width},
                {"heads", cfg.heads},
                {"mlp_ratio", cfg.mlp_ratio},
                {"kernel",
                 {{"type", cfg.kernel.type},
                  {"sigma", cfg.kernel.sigma},
                  {"window", cfg.kernel.window},
                  {"normalized", cfg.kernel.normalized}}},
                {"fact",
                 {{"enabled", cfg.fact.enabled},
                  {"rank", cfg.fact.rank},
                  {"split_uv", cfg.fact.split_uv}}},
                {"ffm_enabled", cfg.ffm_enabled},
                {"ffm_transform", cfg.ffm_transform},
                {"ffm_channels", cfg.ffm_channels},
                {"attention_order", cfg.attention_order},
                {"temporal_mode", cfg.temporal_mode},
                {"multiscale_fusion", cfg.multiscale_fusion},
                {"adapter_rank", cfg.adapter_rank}};
}

json to_json(const TrainConfig& cfg) {
    return json{{"learning_rate", cfg.learning_rate},
                {"weight_decay", cfg.weight_decay},
                {"epochs", cfg.epochs},
                {"pretrain_epochs", cfg.pretrain_epochs},
                {"batch_size", cfg.batch_size},
                {"clip_len", cfg.clip_len},
                {"augment",
                 {{"flip", cfg.augment.flip},
                  {"scale", cfg.augment.scale},
                  {"contrast", cfg.augment.contrast}}},
                {"seed", cfg.seed}};
}

json to_json(const RunConfig& cfg) {
    return json{{"model", to_json(cfg.model)}, {"train", to_json(cfg.train)}};
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j = json::parse(in);
    RunConfig cfg;
    from_json_strict(j, cfg);
    return cfg;
}

void apply_override(json& j, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like section.key=value: " + spec);
    }
    const std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    json* cursor = &j;
    size_t start = 0;
    while (true) {
        const size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw std::invalid_argument("override has an empty key: " + spec);
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error&) {
                parsed = value;  // bare strings allowed
            }
            (*cursor)[key] = parsed;
            return;
        }
        cursor = &(*cursor)[key];
        start = dot + 1;
    }
}

}  // namespace medivista
