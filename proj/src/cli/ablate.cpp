#include <fstream>
#include <functional>
#include <iostream>
#include <stdexcept>

#include "cli/commands.hpp"
#include "eval/evaluate.hpp"
#include "model/model.hpp"
#include "train/trainer.hpp"

namespace medivista {

namespace {

struct Variant {
    std::string name;
    std::function<void(ModelConfig&)> mutate;
};

std::vector<Variant> variants_for(const std::string& axis) {
    if (axis == "order") {
        return {{"spatial_only", [](ModelConfig& c) { c.attention_order = "spatial_only"; }},
                {"temporal_then_spatial",
                 [](ModelConfig& c) {
                     c.attention_order = "temporal_first";
                     c.temporal_mode = "plain";
                 }},
                {"spatial_then_tfusion",
                 [](ModelConfig& c) {
                     c.attention_order = "spatial_first";
                     c.temporal_mode = "fusion";
                 }},
                {"tfusion_then_spatial", [](ModelConfig& c) {
                     c.attention_order = "temporal_first";
                     c.temporal_mode = "fusion";
                 }}};
    }
    if (axis == "kernel") {
        auto set = [](const char* type, double sigma) {
            return [type, sigma](ModelConfig& c) {
                c.kernel.type = type;
                c.kernel.sigma = sigma;
                c.kernel.window = 5;
            };
        };
        return {{"gaussian_s0.5", set("gaussian", 0.5)},
                {"gaussian_s1.0", set("gaussian", 1.0)},
                {"bilateral_s1.0", set("bilateral", 1.0)},
                {"laplacian_s1.0", set("laplacian", 1.0)}};
    }
    if (axis == "rank") {
        auto set = [](int r) {
            return [r](ModelConfig& c) {
                c.fact.enabled = true;
                c.fact.rank = r;
            };
        };
        return {{"r4", set(4)}, {"r8", set(8)}, {"r16", set(16)}, {"r32", set(32)}};
    }
    if (axis == "ffm") {
        return {{"off", [](ModelConfig& c) { c.ffm_enabled = false; }},
                {"naive",
                 [](ModelConfig& c) {
                     c.ffm_enabled = true;
                     c.ffm_transform = "none";
                 }},
                {"fourier",
                 [](ModelConfig& c) {
                     c.ffm_enabled = true;
                     c.ffm_transform = "fourier";
                 }},
                {"wavelet", [](ModelConfig& c) {
                     c.ffm_enabled = true;
                     c.ffm_transform = "wavelet";
                 }}};
    }
    if (axis == "adapter") {
        auto set = [](const char* mode) {
            return [mode](ModelConfig& c) {
                c.attention_order = "temporal_first";
                c.temporal_mode = mode;
            };
        };
        return {{"temporal_conv", set("conv")},
                {"temporal_attention", set("plain")},
                {"first_frame", set("first_frame")},
                {"temporal_fusion", set("fusion")}};
    }
    if (axis == "fusion") {
        return {{"off", [](ModelConfig& c) { c.multiscale_fusion = false; }},
                {"on", [](ModelConfig& c) { c.multiscale_fusion = true; }}};
    }
    if (axis == "backbone") {
        auto set = [](int dim, int depth) {
            return [dim, depth](ModelConfig& c) {
                c.embed_dim = dim;
                c.depth = depth;
                if (c.fact.rank > dim) c.fact.rank = dim / 2;
            };
        };
        return {{"vit_b", set(16, 4)}, {"vit_l", set(32, 4)}, {"vit_h", set(32, 8)}};
    }
    throw std::invalid_argument("ablate: unknown axis '" + axis + "'");
}

struct Row {
    std::string variant;
    double dice = 0.0;
    double l = 0.0;
};

Row run_variant(const std::string& axis, const Variant& variant, const Dataset& data,
                RunConfig base, const std::filesystem::path& out_dir, uint64_t seed) {
    base.model.frames = data.frames;
    base.model.height = data.height;
    base.model.width = data.width;
    base.model.num_classes = static_cast<int>(data.classes.size());
    variant.mutate(base.model);
    base.model.validate();

    const std::filesystem::path vdir = out_dir / ("run_" + axis + "_" + variant.name);
    MediVistaModel model(base.model, seed);
    TrainResult tr = train_loop(data, model, base.train, vdir);
    if (tr.aborted) {
        throw std::runtime_error("ablate: variant " + variant.name + " aborted: " +
                                 tr.abort_reason);
    }
    load_checkpoint_params(tr.checkpoint_dir, model.params());

    const std::string eval_split = data.split_indices("test").empty() ? "val" : "test";
    EvalReport report = evaluate_split(model, data, eval_split);
    Row row;
    row.variant = variant.name;
    int l_count = 0;
    for (const VideoEval& v : report.videos) {
        row.dice += v.structures[0].dice;  // endo
        if (v.structures[0].l_pred) {
            row.l += *v.structures[0].l_pred;
            ++l_count;
        }
    }
    row.dice /= static_cast<double>(report.videos.size());
    row.l = l_count ? row.l / l_count : std::numeric_limits<double>::quiet_NaN();
    return row;
}

void write_axis_csv(const std::filesystem::path& file, const std::vector<Row>& rows) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("ablate: cannot write " + file.string());
    out << "variant,dice,L\n";
    char buf[128];
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g\n", r.variant.c_str(), r.dice, r.l);
        out << buf;
    }
}

}  // namespace

int cmd_ablate(const AblateArgs& args) {
    if (args.axis.empty() || args.data.empty() || args.out.empty()) {
        throw std::invalid_argument("ablate: --axis, --data and --out are required");
    }
    static const std::vector<std::string> kAxes = {"order", "kernel", "rank",  "ffm",
                                                   "adapter", "fusion", "backbone"};
    std::vector<std::string> axes;
    if (args.axis == "all") {
        axes = kAxes;
    } else {
        variants_for(args.axis);  // validates the name
        axes = {args.axis};
    }

    Dataset data = Dataset::load(args.data);

    // short per-variant recipe unless a config overrides it
    nlohmann::json j = args.config.empty() ? to_json(RunConfig{}) : nlohmann::json();
    if (!args.config.empty()) {
        std::ifstream in(args.config);
        if (!in) throw std::invalid_argument("ablate: cannot open config " + args.config);
        j = nlohmann::json::parse(in);
    } else {
        j["train"]["epochs"] = 4;
        j["train"]["pretrain_epochs"] = 2;
        j["train"]["learning_rate"] = 2e-3;
        j["train"]["batch_size"] = 2;
    }
    for (const std::string& o : args.overrides) apply_override(j, o);
    RunConfig base;
    from_json_strict(j, base);
    base.train.seed = args.seed;

    std::filesystem::create_directories(args.out);
    for (const std::string& axis : axes) {
        std::vector<Row> rows;
        for (const Variant& v : variants_for(axis)) {
            std::cout << "[ablate] axis " << axis << ", variant " << v.name << "\n";
            rows.push_back(run_variant(axis, v, data, base, args.out, args.seed));
        }
        const std::filesystem::path csv =
            std::filesystem::path(args.out) / ("ablate_" + axis + ".csv");
        write_axis_csv(csv, rows);
        std::cout << "[ablate] wrote " << csv.string() << "\n";
    }
    return 0;
}

}  // namespace medivista
