#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auxfm/rng.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

enum class Activation { tanh, silu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Weights and biases of a fully connected network, laid out per layer.
/// Layer k maps dims[k] -> dims[k+1]: weight (dims[k+1], dims[k]), bias (dims[k+1], 1).
struct MlpParams {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;

    std::size_t num_layers() const { return weights.size(); }
    std::size_t parameter_count() const;
    void fill(double value);
    /// Flat view order: W0, b0, W1, b1, ... each row-major.
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);
    double& flat_at(std::size_t index);
};

using MlpGrads = MlpParams;

/// Activations kept from a forward pass for the backward pass.
struct MlpCache {
    std::vector<Tensor> inputs;  // input to each layer (post-activation of previous)
    std::vector<Tensor> pre;     // pre-activation of each layer
};

/// Relaxed atomic counter that survives copies (the copy starts from the
/// source's current value).
class CallCounter {
public:
    CallCounter() = default;
    CallCounter(const CallCounter& other) : count_(other.get()) {}
    CallCounter& operator=(const CallCounter& other) {
        count_.store(other.get(), std::memory_order_relaxed);
        return *this;
    }
    void bump() const { count_.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t get() const { return count_.load(std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> count_{0};
};

/// Feed-forward network with `activation` on hidden layers and identity output.
/// Inputs are (batch, input_dim): one sample per row.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_dims, Activation activation);

    /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)); zero biases.
    static Mlp glorot(std::vector<std::size_t> layer_dims, Activation activation, RngStream& rng);
    static Mlp zeros(std::vector<std::size_t> layer_dims, Activation activation);

    const std::vector<std::size_t>& layer_dims() const { return dims_; }
    Activation activation() const { return activation_; }
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t output_dim() const { return dims_.back(); }
    std::size_t parameter_count() const { return params_.parameter_count(); }

    MlpParams& params() { return params_; }
    const MlpParams& params() const { return params_; }
    MlpGrads zero_grads() const;

    Tensor forward(const Tensor& input) const;
    Tensor forward(const Tensor& input, MlpCache& cache) const;
    /// Number of batched forward passes run on this network so far.
    std::uint64_t forward_calls() const { return forward_calls_.get(); }

    /// Gradients of <upstream, output> with respect to every parameter (accumulated
    /// into `grads`) and, when requested, with respect to the input.
    void backward(const MlpCache& cache, const Tensor& upstream, MlpGrads& grads, Tensor* input_grad = nullptr) const;

private:
    void check_input(const Tensor& input) const;

    std::vector<std::size_t> dims_;
    Activation activation_ = Activation::tanh;
    MlpParams params_;
    CallCounter forward_calls_;
};

/// Convenience wrapper: forward + backward from scratch, returns parameter grads.
struct BackwardResult {
    MlpGrads param_grads;
    Tensor input_grad;
};
BackwardResult mlp_backward(const Mlp& model, const Tensor& input, const Tensor& upstream);

}  // namespace auxfm
