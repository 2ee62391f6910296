#include "asterlab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace asterlab::num {

AdamState AdamState::init(const std::vector<Value*>& params, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.first_moment.reserve(params.size());
    s.second_moment.reserve(params.size());
    for (const Value* p : params) {
        s.first_moment.emplace_back(p->size(), 0.0);
        s.second_moment.emplace_back(p->size(), 0.0);
    }
    return s;
}

void adam_step(const std::vector<Value*>& params, const std::vector<std::vector<double>>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient/state counts disagree");
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Value& p = *params[i];
        const std::vector<double>& g = grads[i];
        if (g.size() != p.size()) {
            throw std::invalid_argument("adam_step: gradient size " + std::to_string(g.size()) +
                                        " does not match parameter shape " + shape_str(p.shape()));
        }
        std::vector<double>& m = state.first_moment[i];
        std::vector<double>& v = state.second_moment[i];
        for (std::size_t j = 0; j < g.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p.data()[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads)
        for (double v : g) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (auto& g : grads)
            for (double& v : g) v *= s;
    }
    return norm;
}

}  // namespace asterlab::num
