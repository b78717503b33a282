#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/tensor.hpp"
#include "model/config.hpp"

namespace medivista {

// Named, ordered parameter set. Backbone parameters live under "backbone/",
// adapter-side groups under "adapter/", "ffm/", "cba/", "decoder/" and
// "fact/"; freezing toggles trainability by prefix.
class ParamStore {
public:
    Tensor add(const std::string& name, Tensor t, bool trainable);
    Tensor get(const std::string& name) const;
    bool contains(const std::string& name) const;

    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
    std::vector<Tensor> trainable() const;

    void set_trainable_by_prefix(const std::string& prefix, bool on);
    void zero_grads();

    int64_t total_count() const;
    int64_t trainable_count() const;

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, size_t> index_;
};

// (trainable parameters) / (all parameters), by element count.
double trainable_fraction(const ParamStore& params);

// Checkpoint container: directory of MVST files plus manifest.json mapping
// parameter names to files, recording the model config and grouping names
// into sections ("backbone", "fact", ...) by prefix.
void save_checkpoint(const std::filesystem::path& dir, const ParamStore& params,
                     const ModelConfig& cfg,
                     const std::function<nlohmann::json()>& extra = {});
ModelConfig load_checkpoint_config(const std::filesystem::path& dir);
void load_checkpoint_params(const std::filesystem::path& dir, ParamStore& params);

}  // namespace medivista
