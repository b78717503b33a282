#include "core/gradcheck.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "core/ops.hpp"

namespace medivista {

namespace {

double eval_loss(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                 const std::vector<Shape>& shapes,
                 const std::vector<std::vector<double>>& vals) {
    NoGradGuard ng;
    std::vector<Tensor> inputs;
    inputs.reserve(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) inputs.push_back(Tensor::from(shapes[i], vals[i]));
    return sum(op(inputs))[0];
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                           const std::vector<Shape>& shapes,
                           const std::vector<std::vector<double>>& base,
                           const std::vector<bool>& wrt, double tol, double step) {
    if (shapes.size() != base.size() || shapes.size() != wrt.size()) {
        throw std::invalid_argument("grad_check: shapes/base/wrt size mismatch");
    }

    // Analytic pass
    std::vector<Tensor> inputs;
    inputs.reserve(base.size());
    for (size_t i = 0; i < base.size(); ++i) {
        Tensor t = Tensor::from(shapes[i], base[i]);
        t.set_trainable(wrt[i]);
        inputs.push_back(t);
    }
    Tensor loss = sum(op(inputs));
    backward(loss);

    GradCheckReport report;
    std::vector<std::vector<double>> probe = base;
    for (size_t i = 0; i < base.size(); ++i) {
        if (!wrt[i]) continue;
        const std::vector<double> analytic = inputs[i].has_grad()
                                                 ? inputs[i].grad()
                                                 : std::vector<double>(base[i].size(), 0.0);
        for (size_t j = 0; j < base[i].size(); ++j) {
            const double keep = probe[i][j];
            probe[i][j] = keep + step;
            const double lp = eval_loss(op, shapes, probe);
            probe[i][j] = keep - step;
            const double lm = eval_loss(op, shapes, probe);
            probe[i][j] = keep;
            const double fd = (lp - lm) / (2.0 * step);
            const double a = analytic[j];
            const double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                std::ostringstream w;
                w << "input " << i << " elem " << j << ": analytic=" << a << " fd=" << fd;
                report.worst = w.str();
            }
        }
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

GradCheckReport grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                           const std::vector<Shape>& shapes,
                           const std::vector<std::vector<double>>& base, double tol,
                           double step) {
    return grad_check(op, shapes, base, std::vector<bool>(base.size(), true), tol, step);
}

GradCheckRegistry& GradCheckRegistry::instance() {
    static GradCheckRegistry reg;
    return reg;
}

void GradCheckRegistry::add(GradCheckCase c) {
    for (const auto& existing : cases_) {
        if (existing.name == c.name) return;  // idempotent registration
    }
    cases_.push_back(std::move(c));
}

const GradCheckCase* GradCheckRegistry::find(const std::string& name) const {
    for (const auto& c : cases_) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

}  // namespace medivista
