#include "model/params.hpp"

#include <fstream>
#include <stdexcept>

#include "core/mvst.hpp"

namespace medivista {

Tensor ParamStore::add(const std::string& name, Tensor t, bool trainable) {
    if (index_.count(name)) throw std::logic_error("param registered twice: " + name);
    t.set_trainable(trainable);
    index_[name] = entries_.size();
    entries_.emplace_back(name, t);
    return t;
}

Tensor ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no such param: " + name);
    return entries_[it->second].second;
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) > 0; }

std::vector<Tensor> ParamStore::trainable() const {
    std::vector<Tensor> out;
    for (const auto& [name, t] : entries_)
        if (t.trainable()) out.push_back(t);
    return out;
}

void ParamStore::set_trainable_by_prefix(const std::string& prefix, bool on) {
    for (auto& [name, t] : entries_) {
        if (name.rfind(prefix, 0) == 0) t.set_trainable(on);
    }
}

void ParamStore::zero_grads() {
    for (auto& [name, t] : entries_) t.zero_grad();
}

int64_t ParamStore::total_count() const {
    int64_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
}

int64_t ParamStore::trainable_count() const {
    int64_t n = 0;
    for (const auto& [name, t] : entries_)
        if (t.trainable()) n += t.numel();
    return n;
}

double trainable_fraction(const ParamStore& params) {
    const int64_t total = params.total_count();
    if (total == 0) return 0.0;
    return static_cast<double>(params.trainable_count()) / static_cast<double>(total);
}

namespace {

std::string file_name_for(const std::string& param) {
    std::string f = param;
    for (char& c : f)
        if (c == '/') c = '.';
    return f + ".mvst";
}

std::string section_of(const std::string& param) {
    const auto slash = param.find('/');
    return slash == std::string::npos ? param : param.substr(0, slash);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ParamStore& params,
                     const ModelConfig& cfg, const std::function<nlohmann::json()>& extra) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "params");
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["config"] = to_json(cfg);
    nlohmann::json files = nlohmann::json::object();
    nlohmann::json sections = nlohmann::json::object();
    for (const auto& [name, t] : params.entries()) {
        const std::string f = file_name_for(name);
        write_mvst_f64(dir / "params" / f, t.shape(), t.values());
        files[name] = "params/" + f;
        sections[section_of(name)].push_back(name);
    }
    manifest["params"] = files;
    manifest["sections"] = sections;
    if (extra) manifest["extra"] = extra();
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("checkpoint: cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

ModelConfig load_checkpoint_config(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("checkpoint: no manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(in);
    ModelConfig cfg;
    from_json_strict(manifest.at("config"), cfg);
    return cfg;
}

void load_checkpoint_params(const std::filesystem::path& dir, ParamStore& params) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("checkpoint: no manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(in);
    const auto& files = manifest.at("params");
    for (const auto& [name, t] : params.entries()) {
        if (!files.contains(name)) {
            throw std::runtime_error("checkpoint: parameter missing from manifest: " + name);
        }
        MvstFile f = read_mvst(dir / files.at(name).get<std::string>());
        if (f.shape != t.shape()) {
            throw std::runtime_error("checkpoint: shape mismatch for " + name + ": file " +
                                     shape_str(f.shape) + " vs model " + shape_str(t.shape()));
        }
        Tensor dst = t;
        std::copy(f.f64.begin(), f.f64.end(), dst.data());
    }
}

}  // namespace medivista
