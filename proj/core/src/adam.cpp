#include "evpr/adam.hpp"

#include <cmath>

namespace evpr {

void Adam::step(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) {
        State& s = state_[p.get()];
        if (s.m.empty()) {
            s.m.assign(p->value.size(), 0.0);
            s.v.assign(p->value.size(), 0.0);
        }
        s.t += 1;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(s.t));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(s.t));
        const bool has_grad = !p->grad.empty();
        for (size_t i = 0; i < p->value.size(); ++i) {
            const double gi = has_grad ? p->grad[i] : 0.0;
            s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * gi;
            s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * gi * gi;
            const double mhat = s.m[i] / bc1;
            const double vhat = s.v[i] / bc2;
            p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace evpr
