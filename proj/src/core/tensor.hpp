#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace medivista {

// Row-major extents. Scalars are shape {1}.
using Shape = std::vector<int>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily during backward()
    bool requires_grad = false;
    bool trainable = false;  // leaf parameter flag; implies requires_grad
    std::string op;          // producing op, "leaf" for inputs/parameters
    std::vector<std::shared_ptr<Node>> parents;
    // Accumulates vector-Jacobian products of this->grad into parent grads.
    std::function<void(Node&)> backward;

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

// Dense 64-bit float tensor participating in a per-forward-pass tape.
// Copies are shallow (shared node); treat tensors consumed by an op as
// immutable afterwards.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const Shape& shape);
    static Tensor full(const Shape& shape, double v);
    static Tensor scalar(double v) { return full({1}, v); }
    static Tensor from(const Shape& shape, std::vector<double> data);
    static Tensor randn(const Shape& shape, RngStream& rng, double stddev = 1.0);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return node_->numel(); }

    double* data() { return node_->value.data(); }
    const double* data() const { return node_->value.data(); }
    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }

    double operator[](int64_t i) const { return node_->value[static_cast<size_t>(i)]; }
    double& operator[](int64_t i) { return node_->value[static_cast<size_t>(i)]; }
    double at(int i) const { return (*this)[i]; }
    double at(int i, int j) const { return (*this)[static_cast<int64_t>(i) * dim(1) + j]; }
    double at(int i, int j, int k) const {
        return (*this)[(static_cast<int64_t>(i) * dim(1) + j) * dim(2) + k];
    }
    double at(int i, int j, int k, int l) const {
        return (*this)[((static_cast<int64_t>(i) * dim(1) + j) * dim(2) + k) * dim(3) + l];
    }

    // Gradient access (valid after backward()). Absent for frozen leaves.
    bool has_grad() const { return node_ && !node_->grad.empty(); }
    const std::vector<double>& grad() const;
    void zero_grad() { if (node_) node_->grad.clear(); }

    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool trainable() const { return node_ && node_->trainable; }
    // Only meaningful on leaves; marks the tensor as a trainable parameter.
    Tensor& set_trainable(bool on);

    const std::string& op() const { return node_->op; }
    std::shared_ptr<detail::Node> node() const { return node_; }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    friend Tensor make_op(std::string, Shape, std::vector<double>, std::vector<Tensor>,
                          std::function<void(detail::Node&)>);
    friend Tensor make_leaf(Shape, std::vector<double>, const std::string&);
    std::shared_ptr<detail::Node> node_;
};

// Runs reverse mode from a scalar loss over the recorded graph.
void backward(const Tensor& loss);

// Disables tape recording in scope; ops produce detached leaves.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool grad_enabled();

// Op construction helper. Validates the output is finite (NaN/Inf anywhere is
// a hard error naming the op) and wires the tape edge when recording.
Tensor make_op(std::string op_name, Shape shape, std::vector<double> value,
               std::vector<Tensor> parents, std::function<void(detail::Node&)> vjp);
Tensor make_leaf(Shape shape, std::vector<double> value, const std::string& tag = "leaf");

// Accumulate v into a parent's grad buffer if it participates in the tape.
inline void accumulate_grad(detail::Node& parent, const double* v, int64_t n) {
    if (!parent.requires_grad) return;
    parent.ensure_grad();
    double* g = parent.grad.data();
    for (int64_t i = 0; i < n; ++i) g[i] += v[i];
}

}  // namespace medivista
