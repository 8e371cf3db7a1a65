#include "glkm/ad/graph.hpp"

#include <unordered_set>

namespace glkm::ad {

Var make_op(const char* name, Tensor value, std::vector<Var> inputs,
            std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->op = name;
    bool req = false;
    n->inputs.reserve(inputs.size());
    for (Var& v : inputs) {
        req = req || v.node->requires_grad;
        n->inputs.push_back(v.node);
    }
    n->requires_grad = req;
    if (req) n->backward_fn = std::move(backward_fn);
    return Var(std::move(n));
}

void backward(const Var& loss) {
    require(loss.defined() && loss.node->value.numel() == 1,
            "backward: loss must be a defined scalar");

    // Iterative post-order DFS over the subgraph that requires gradients.
    std::vector<Node*> topo;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.push_back({loss.node.get(), 0});
    visited.insert(loss.node.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->inputs.size()) {
            Node* child = n->inputs[idx++].get();
            if (child->requires_grad && !visited.count(child)) {
                visited.insert(child);
                stack.push_back({child, 0});
            }
        } else {
            topo.push_back(n);
            stack.pop_back();
        }
    }

    loss.node->ensure_grad().data[0] += 1.0f;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && n->has_grad()) n->backward_fn(*n);
    }
}

} // namespace glkm::ad
