#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glkm/core/tensor.hpp"

namespace glkm::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One node of the dynamically built reverse-mode tape.
struct Node {
    Tensor value;
    Tensor grad; // allocated on first accumulation
    bool requires_grad = false;
    std::vector<NodePtr> inputs;
    std::function<void(Node&)> backward_fn;
    const char* op = "";

    Tensor& ensure_grad() {
        if (grad.data.empty()) grad = Tensor(value.shape);
        return grad;
    }
    bool has_grad() const { return !grad.data.empty(); }
};

/// Lightweight handle to a graph node.
class Var {
public:
    Var() = default;
    explicit Var(NodePtr n) : node(std::move(n)) {}

    /// Trainable or optimizable leaf.
    static Var leaf(Tensor value, bool requires_grad = true) {
        auto n = std::make_shared<Node>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        n->op = "leaf";
        return Var(std::move(n));
    }
    /// Non-differentiable input.
    static Var constant(Tensor value) { return leaf(std::move(value), false); }

    bool defined() const { return node != nullptr; }
    const Tensor& value() const { return node->value; }
    Tensor& value() { return node->value; }
    Tensor& grad() { return node->ensure_grad(); }
    bool requires_grad() const { return node->requires_grad; }
    const std::vector<int>& shape() const { return node->value.shape; }

    /// Scalar convenience for loss nodes.
    double item() const { return node->value.data.at(0); }

    void zero_grad() {
        if (node->has_grad()) node->grad.fill(0.0f);
    }

    NodePtr node;
};

/// Creates an interior node. requires_grad is inherited from the inputs.
Var make_op(const char* name, Tensor value, std::vector<Var> inputs,
            std::function<void(Node&)> backward_fn);

/// Reverse-mode sweep from a scalar loss (seeds gradient 1).
void backward(const Var& loss);

} // namespace glkm::ad
