#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evpr/tensor.hpp"

namespace evpr {

// One recorded primitive operation. `backward` reads output->grad and
// accumulates into the grads of inputs that require it.
struct Node {
    const char* op;
    std::vector<TensorPtr> inputs;
    TensorPtr output;
    std::function<void(const Node&)> backward;
};

// Reverse-mode tape. Nodes are appended in execution order; backward()
// walks them in exact reverse append order, so every node sees its
// downstream gradient before propagating to its inputs.
//
// A Graph and its tensors belong to one thread for the duration of a
// forward/backward pass; distinct graphs may run concurrently.
class Graph {
public:
    // Records the node only when grads can flow (some input requires grad).
    // Marks the output as requiring grad in that case.
    TensorPtr record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                     std::function<void(const Node&)> backward);

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape once in reverse.
    // Gradients ACCUMULATE into Tensor::grad; calling backward again
    // without zeroing grads adds another full contribution.
    void backward(const TensorPtr& loss);

    size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    std::vector<Node> nodes_;
};

}  // namespace evpr
