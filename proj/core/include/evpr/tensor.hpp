#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "evpr/rng.hpp"

namespace evpr {

using Shape = std::vector<int>;

int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major tensor of doubles. Training numerics stay in 64-bit;
// checkpoint files store 32-bit payloads (see checkpoint.hpp).
class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

class Tensor {
public:
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // same length as value once touched by backward
    bool requires_grad = false;

    Tensor() = default;
    Tensor(Shape s, std::vector<double> v);

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    bool is_scalar() const { return numel() == 1; }

    double item() const;

    void ensure_grad();
    void zero_grad();
    bool all_finite() const;

    static TensorPtr zeros(const Shape& shape, bool requires_grad = false);
    static TensorPtr full(const Shape& shape, double v, bool requires_grad = false);
    static TensorPtr from(const Shape& shape, std::vector<double> data, bool requires_grad = false);
    static TensorPtr scalar(double v, bool requires_grad = false);
    static TensorPtr randn(const Shape& shape, Rng& rng, double stddev = 1.0, bool requires_grad = false);
    // uniform in [-bound, bound]
    static TensorPtr rand_uniform(const Shape& shape, Rng& rng, double bound, bool requires_grad = false);
};

void check_finite(const Tensor& t, const char* what);

}  // namespace evpr
