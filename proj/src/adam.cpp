#include "auxfm/adam.hpp"

#include <cmath>

#include "auxfm/error.hpp"

namespace auxfm {

AdamState::AdamState(const Mlp& model, AdamConfig cfg)
    : config(cfg), first_moment(model.zero_grads()), second_moment(model.zero_grads()) {}

namespace {

void check_finite(const MlpGrads& grads) {
    for (std::size_t k = 0; k < grads.num_layers(); ++k) {
        if (!grads.weights[k].all_finite()) {
            throw NumericError("non-finite gradient in weights of layer " + std::to_string(k));
        }
        if (!grads.biases[k].all_finite()) {
            throw NumericError("non-finite gradient in biases of layer " + std::to_string(k));
        }
    }
}

void update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamConfig& cfg, double corr1,
            double corr2) {
    auto p = param.flat();
    auto g = grad.flat();
    auto mf = m.flat();
    auto vf = v.flat();
    for (std::size_t i = 0; i < p.size(); ++i) {
        mf[i] = cfg.beta1 * mf[i] + (1.0 - cfg.beta1) * g[i];
        vf[i] = cfg.beta2 * vf[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = mf[i] / corr1;
        const double v_hat = vf[i] / corr2;
        p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace

void adam_step(Mlp& model, const MlpGrads& grads, AdamState& state) {
    auto& params = model.params();
    if (grads.num_layers() != params.num_layers() || state.first_moment.num_layers() != params.num_layers()) {
        throw ShapeError("adam_step: gradient/state layout does not match the model");
    }
    for (std::size_t k = 0; k < params.num_layers(); ++k) {
        require_same_shape(params.weights[k], grads.weights[k], "adam_step weights");
        require_same_shape(params.biases[k], grads.biases[k], "adam_step biases");
    }
    check_finite(grads);

    ++state.step;
    const auto t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(state.config.beta1, t);
    const double corr2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t k = 0; k < params.num_layers(); ++k) {
        update(params.weights[k], grads.weights[k], state.first_moment.weights[k], state.second_moment.weights[k],
               state.config, corr1, corr2);
        update(params.biases[k], grads.biases[k], state.first_moment.biases[k], state.second_moment.biases[k],
               state.config, corr1, corr2);
    }
}

}  // namespace auxfm
