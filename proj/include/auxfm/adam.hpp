#pragma once

#include <cstdint>

#include "auxfm/mlp.hpp"

namespace auxfm {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    MlpGrads first_moment;
    MlpGrads second_moment;
    std::uint64_t step = 0;

    AdamState() = default;
    AdamState(const Mlp& model, AdamConfig cfg);
};

/// One bias-corrected Adam update. Throws NumericError naming the layer when a
/// gradient entry is not finite; the model is left untouched in that case.
void adam_step(Mlp& model, const MlpGrads& grads, AdamState& state);

}  // namespace auxfm
