#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace medivista {

// Subcommand bodies, linked into the CLI and driven directly by tests.
// Usage-class problems throw std::invalid_argument (exit 1); anything else
// that escapes is a runtime failure (exit 2).

struct PhantomArgs {
    std::string out;
    int count = 100;
    uint64_t seed = 7;
    int frames = 8;
    std::string size = "64x64";
    double eject = 0.4;
    int structures = 2;
};
int cmd_phantom(const PhantomArgs& args);

struct TrainArgs {
    std::string data;
    std::string config;  // optional JSON run config
    std::string out;
    std::vector<std::string> overrides;  // section.key=value
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
    std::string data;
    std::string ckpt;
    std::string report;
    std::string split = "test";
};
int cmd_eval(const EvalArgs& args);

struct GradcheckArgs {
    double tol = 1e-5;
    bool tol_given = false;  // when set, overrides per-case tolerances
    std::string op;          // run a single case (hidden ones included)
    int seeds = 3;
};
int cmd_gradcheck(const GradcheckArgs& args);

struct AblateArgs {
    std::string axis;  // order|kernel|rank|ffm|adapter|fusion|backbone|all
    std::string data;
    std::string out;
    std::string config;  // optional run config for the per-variant recipe
    std::vector<std::string> overrides;
    uint64_t seed = 1234;
};
int cmd_ablate(const AblateArgs& args);

// Registers every DifferentiableOp check (core ops, wavelet, attention,
// FacT, the masked loss, and the end-to-end core gradient).
void register_all_gradcheck_cases();

uint64_t derive_seed(uint64_t seed, uint64_t lane);

}  // namespace medivista
