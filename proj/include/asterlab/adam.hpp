#pragma once

#include "asterlab/value.hpp"

namespace asterlab::num {

// Adam with bias correction. One state instance owns the moment buffers for
// a fixed parameter list; step_count advances by exactly one per update.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    static AdamState init(const std::vector<Value*>& params, double learning_rate = 1e-3);
};

void adam_step(const std::vector<Value*>& params, const std::vector<std::vector<double>>& grads, AdamState& state);

// Rescales grads in place so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);

}  // namespace asterlab::num
