#include "evpr/tensor.hpp"

#include <cmath>
#include <sstream>

#include "evpr/errors.hpp"

namespace evpr {

int64_t numel_of(const Shape& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + std::to_string(d));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), value(std::move(v)) {
    if (numel_of(shape) != static_cast<int64_t>(value.size())) {
        throw ShapeError("data length " + std::to_string(value.size()) +
                         " does not match shape " + shape_str(shape));
    }
}

double Tensor::item() const {
    if (!is_scalar()) throw ShapeError("item() requires a scalar tensor, shape is " + shape_str(shape));
    return value[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) grad.assign(value.size(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : value) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

TensorPtr Tensor::zeros(const Shape& shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>(shape, std::vector<double>(numel_of(shape), 0.0));
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::full(const Shape& shape, double v, bool requires_grad) {
    auto t = std::make_shared<Tensor>(shape, std::vector<double>(numel_of(shape), v));
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::from(const Shape& shape, std::vector<double> data, bool requires_grad) {
    auto t = std::make_shared<Tensor>(shape, std::move(data));
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

TensorPtr Tensor::randn(const Shape& shape, Rng& rng, double stddev, bool requires_grad) {
    std::vector<double> data(numel_of(shape));
    for (double& x : data) x = stddev * rng.normal();
    return from(shape, std::move(data), requires_grad);
}

TensorPtr Tensor::rand_uniform(const Shape& shape, Rng& rng, double bound, bool requires_grad) {
    std::vector<double> data(numel_of(shape));
    for (double& x : data) x = rng.uniform(-bound, bound);
    return from(shape, std::move(data), requires_grad);
}

void check_finite(const Tensor& t, const char* what) {
    for (double v : t.value) {
        if (!std::isfinite(v)) {
            throw NumericsError(std::string("non-finite value in ") + what);
        }
    }
}

}  // namespace evpr
