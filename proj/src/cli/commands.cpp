#include "cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "core/gradcheck.hpp"
#include "eval/evaluate.hpp"
#include "model/model.hpp"
#include "phantom/phantom.hpp"
#include "train/trainer.hpp"

namespace medivista {

uint64_t derive_seed(uint64_t seed, uint64_t lane) {
    return RngStream::mix(seed ^ RngStream::mix(lane + 1));
}

namespace {

void parse_size(const std::string& size, int& h, int& w) {
    const auto x = size.find('x');
    if (x == std::string::npos) {
        throw std::invalid_argument("size must look like HxW, got '" + size + "'");
    }
    try {
        h = std::stoi(size.substr(0, x));
        w = std::stoi(size.substr(x + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("size must look like HxW, got '" + size + "'");
    }
}

RunConfig effective_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config file " + config_path);
        j = nlohmann::json::parse(in);
    } else {
        j = to_json(RunConfig{});
    }
    for (const std::string& o : overrides) apply_override(j, o);
    RunConfig cfg;
    from_json_strict(j, cfg);
    return cfg;
}

void echo_config(const std::filesystem::path& out_dir, const RunConfig& cfg) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "effective_config.json");
    if (!out) throw std::runtime_error("cannot write effective config in " + out_dir.string());
    out << to_json(cfg).dump(2) << "\n";
}

}  // namespace

int cmd_phantom(const PhantomArgs& args) {
    if (args.out.empty()) throw std::invalid_argument("phantom: --out is required");
    if (args.count < 1) throw std::invalid_argument("phantom: --count must be >= 1");
    PhantomParams params;
    params.frames = args.frames;
    parse_size(args.size, params.height, params.width);
    params.eject = args.eject;
    params.structures = args.structures;
    params.validate();

    std::vector<PhantomRecord> records;
    records.reserve(static_cast<size_t>(args.count));
    for (int i = 0; i < args.count; ++i) {
        records.push_back(generate_phantom(params, derive_seed(args.seed, static_cast<uint64_t>(i))));
    }
    nlohmann::json manifest = write_dataset(records, args.out, {}, args.seed);
    int n_train = 0, n_val = 0, n_test = 0;
    for (const auto& r : manifest.at("records")) {
        const std::string s = r.at("split").get<std::string>();
        n_train += s == "train";
        n_val += s == "val";
        n_test += s == "test";
    }
    std::cout << "wrote " << records.size() << " phantom videos to " << args.out << " (train "
              << n_train << ", val " << n_val << ", test " << n_test << ")\n";
    return 0;
}

int cmd_train(const TrainArgs& args) {
    if (args.data.empty() || args.out.empty()) {
        throw std::invalid_argument("train: --data and --out are required");
    }
    RunConfig cfg = effective_config(args.config, args.overrides);
    echo_config(args.out, cfg);

    Dataset data = Dataset::load(args.data);
    if (data.frames != cfg.model.frames || data.height != cfg.model.height ||
        data.width != cfg.model.width) {
        throw std::invalid_argument("train: dataset geometry " + std::to_string(data.frames) + "x" +
                                    std::to_string(data.height) + "x" + std::to_string(data.width) +
                                    " does not match the model config");
    }
    if (static_cast<int>(data.classes.size()) != cfg.model.num_classes) {
        throw std::invalid_argument("train: dataset has " + std::to_string(data.classes.size()) +
                                    " classes, model expects " +
                                    std::to_string(cfg.model.num_classes));
    }

    MediVistaModel model(cfg.model, cfg.train.seed);
    TrainResult result = train_loop(data, model, cfg.train, args.out);
    std::cout << "trained " << result.log.size() << " epochs; best val dice "
              << result.best_val_dice << " at epoch " << result.best_epoch << "\n";
    if (result.aborted) {
        std::cerr << "training aborted: " << result.abort_reason << "\n";
        return 2;
    }
    return 0;
}

int cmd_eval(const EvalArgs& args) {
    if (args.data.empty() || args.ckpt.empty() || args.report.empty()) {
        throw std::invalid_argument("eval: --data, --ckpt and --report are required");
    }
    ModelConfig mc = load_checkpoint_config(args.ckpt);
    MediVistaModel model(mc, 0);
    load_checkpoint_params(args.ckpt, model.params());
    Dataset data = Dataset::load(args.data);
    EvalReport report = evaluate_split(model, data, args.split);
    write_report_csv(args.report, report);

    for (size_t s = 0; s < report.structures.size(); ++s) {
        double dice_sum = 0.0;
        for (const VideoEval& v : report.videos) dice_sum += v.structures[s].dice;
        std::cout << report.structures[s] << " mean dice "
                  << dice_sum / static_cast<double>(report.videos.size()) << "\n";
    }
    if (report.pearson_block) {
        std::cout << "pearson edv/esv/ef: " << report.pearson_block->edv << " "
                  << report.pearson_block->esv << " " << report.pearson_block->ef << "\n";
    }
    return 0;
}

int cmd_gradcheck(const GradcheckArgs& args) {
    register_all_gradcheck_cases();
    const auto& registry = GradCheckRegistry::instance();
    if (args.seeds < 1) throw std::invalid_argument("gradcheck: --seeds must be >= 1");

    std::vector<const GradCheckCase*> cases;
    if (!args.op.empty()) {
        const GradCheckCase* c = registry.find(args.op);
        if (!c) throw std::invalid_argument("gradcheck: unknown op '" + args.op + "'");
        cases.push_back(c);
    } else {
        for (const auto& c : registry.cases())
            if (!c.hidden) cases.push_back(&c);
    }

    std::printf("%-28s %8s %12s %10s  %s\n", "op", "seeds", "max_rel_err", "tol", "status");
    bool all_pass = true;
    for (const GradCheckCase* c : cases) {
        const double tol = args.tol_given ? args.tol : c->tol;
        double worst = 0.0;
        bool pass = true;
        for (int s = 0; s < args.seeds; ++s) {
            GradCheckReport r = c->run(derive_seed(20260809, static_cast<uint64_t>(s)), tol);
            worst = std::max(worst, r.max_rel_err);
            pass = pass && r.pass;
        }
        std::printf("%-28s %8d %12.3e %10.1e  %s\n", c->name.c_str(), args.seeds, worst, tol,
                    pass ? "pass" : "FAIL");
        all_pass = all_pass && pass;
    }
    return all_pass ? 0 : 2;
}

}  // namespace medivista
