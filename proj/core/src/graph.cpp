#include "evpr/graph.hpp"

#include <cmath>
#include <unordered_set>

#include "evpr/errors.hpp"

namespace evpr {

TensorPtr Graph::record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                        std::function<void(const Node&)> backward) {
    bool needs = false;
    for (const auto& in : inputs) {
        if (in->requires_grad) {
            needs = true;
            break;
        }
    }
    if (!needs) return output;

    output->requires_grad = true;
    nodes_.push_back(Node{op, std::move(inputs), output, std::move(backward)});
    return nodes_.back().output;
}

void Graph::backward(const TensorPtr& loss) {
    if (!loss->is_scalar()) {
        throw ShapeError("backward requires a scalar loss, shape is " + shape_str(loss->shape));
    }
    if (!std::isfinite(loss->value[0])) {
        throw NumericsError("backward called on non-finite loss");
    }
    // node outputs are transient: clearing them makes every backward call
    // add exactly one d(loss)/dx into each leaf's grad
    for (auto& node : nodes_) node.output->grad.clear();
    loss->ensure_grad();
    loss->grad[0] += 1.0;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        // a node whose output never received gradient contributes nothing
        if (it->output->grad.empty()) continue;
        it->backward(*it);
    }

    std::unordered_set<const Tensor*> seen;
    for (const auto& node : nodes_) {
        for (const auto& in : node.inputs) {
            if (!in->requires_grad || in->grad.empty()) continue;
            if (!seen.insert(in.get()).second) continue;
            for (double g : in->grad) {
                if (!std::isfinite(g)) {
                    throw NumericsError(std::string("non-finite gradient flowing into ") + node.op);
                }
            }
        }
    }
}

}  // namespace evpr
