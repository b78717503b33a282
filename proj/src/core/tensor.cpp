#include "core/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace medivista {

int64_t shape_numel(const Shape& s) {
    if (s.empty()) return 0;
    int64_t n = 1;
    for (int e : s) {
        if (e <= 0) return 0;
        n *= e;
    }
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out << "x";
        out << s[i];
    }
    out << "]";
    return out.str();
}

namespace {

thread_local int g_no_grad_depth = 0;

void check_shape(const Shape& shape, const std::vector<double>& value, const std::string& who) {
    if (shape.empty() || shape_numel(shape) != static_cast<int64_t>(value.size())) {
        throw std::invalid_argument(who + ": shape " + shape_str(shape) + " does not match " +
                                    std::to_string(value.size()) + " values");
    }
}

void check_finite(const std::vector<double>& value, const std::string& op_name) {
    for (double v : value) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("non-finite value produced by op '" + op_name + "'");
        }
    }
}

}  // namespace

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool grad_enabled() { return g_no_grad_depth == 0; }

Tensor make_leaf(Shape shape, std::vector<double> value, const std::string& tag) {
    check_shape(shape, value, tag);
    check_finite(value, tag);
    Tensor t;
    t.node_ = std::make_shared<detail::Node>();
    t.node_->shape = std::move(shape);
    t.node_->value = std::move(value);
    t.node_->op = tag;
    return t;
}

Tensor make_op(std::string op_name, Shape shape, std::vector<double> value,
               std::vector<Tensor> parents, std::function<void(detail::Node&)> vjp) {
    check_shape(shape, value, op_name);
    check_finite(value, op_name);
    Tensor t;
    t.node_ = std::make_shared<detail::Node>();
    t.node_->shape = std::move(shape);
    t.node_->value = std::move(value);
    t.node_->op = std::move(op_name);
    bool needs = false;
    if (grad_enabled()) {
        for (const Tensor& p : parents) {
            if (p.requires_grad()) {
                needs = true;
                break;
            }
        }
    }
    if (needs) {
        t.node_->requires_grad = true;
        t.node_->parents.reserve(parents.size());
        for (const Tensor& p : parents) t.node_->parents.push_back(p.node());
        t.node_->backward = std::move(vjp);
    }
    return t;
}

Tensor Tensor::zeros(const Shape& shape) {
    return make_leaf(shape, std::vector<double>(static_cast<size_t>(shape_numel(shape)), 0.0));
}

Tensor Tensor::full(const Shape& shape, double v) {
    return make_leaf(shape, std::vector<double>(static_cast<size_t>(shape_numel(shape)), v));
}

Tensor Tensor::from(const Shape& shape, std::vector<double> data) {
    return make_leaf(shape, std::move(data));
}

Tensor Tensor::randn(const Shape& shape, RngStream& rng, double stddev) {
    std::vector<double> v(static_cast<size_t>(shape_numel(shape)));
    for (double& x : v) x = stddev * rng.normal();
    return make_leaf(shape, std::move(v));
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) {
        throw std::runtime_error("tensor has no gradient (op '" + node_->op + "')");
    }
    return node_->grad;
}

Tensor& Tensor::set_trainable(bool on) {
    if (!node_->parents.empty()) {
        throw std::logic_error("set_trainable: only leaf tensors can be parameters");
    }
    node_->trainable = on;
    node_->requires_grad = on;
    return *this;
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw std::invalid_argument("backward: loss must be a defined scalar");
    }
    detail::Node* root = loss.node().get();
    if (!root->requires_grad) return;  // nothing trainable in the graph

    // Postorder over the recorded graph, restricted to grad-requiring nodes.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

}  // namespace medivista
