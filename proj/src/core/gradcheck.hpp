#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace medivista {

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    std::string worst;  // "input 0 elem 3: analytic=.. fd=.." for the max error
};

// Compares the tape gradient of loss = sum(op(inputs)) against central finite
// differences (64-bit, default step 1e-5). Inputs are rebuilt from the given
// base values for every probe, so `op` must be a pure function of them.
// Relative error per element is |a - fd| / max(1, |a|, |fd|).
GradCheckReport grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                           const std::vector<Shape>& shapes,
                           const std::vector<std::vector<double>>& base,
                           const std::vector<bool>& wrt, double tol, double step = 1e-5);

// Convenience: differentiate with respect to every input.
GradCheckReport grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                           const std::vector<Shape>& shapes,
                           const std::vector<std::vector<double>>& base, double tol,
                           double step = 1e-5);

struct GradCheckCase {
    std::string name;
    double tol = 1e-5;
    bool hidden = false;  // negative controls; excluded from default sweeps
    std::function<GradCheckReport(uint64_t seed, double tol)> run;
};

// Process-wide registry of differentiable-op checks. Modules register their
// cases once via the register_*_gradcheck_cases() hooks.
class GradCheckRegistry {
public:
    static GradCheckRegistry& instance();
    void add(GradCheckCase c);
    const std::vector<GradCheckCase>& cases() const { return cases_; }
    const GradCheckCase* find(const std::string& name) const;

private:
    std::vector<GradCheckCase> cases_;
};

void register_core_gradcheck_cases();

}  // namespace medivista
