#include "auxfm/mlp.hpp"

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::RowVectorXd>;
using MapVec = Eigen::Map<Eigen::RowVectorXd>;

MapMat as_matrix(Tensor& t) { return MapMat(t.data(), t.rows(), t.cols()); }
ConstMapMat as_matrix(const Tensor& t) { return ConstMapMat(t.data(), t.rows(), t.cols()); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void activate(Activation a, const Tensor& pre, Tensor& out) {
    auto src = pre.flat();
    auto dst = out.flat();
    if (a == Activation::tanh) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
    } else {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * sigmoid(src[i]);
    }
}

// grad <- grad * act'(pre), where `post` is act(pre).
void activation_backward(Activation a, const Tensor& pre, const Tensor& post, Tensor& grad) {
    auto g = grad.flat();
    if (a == Activation::tanh) {
        auto y = post.flat();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
    } else {
        auto z = pre.flat();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double s = sigmoid(z[i]);
            g[i] *= s * (1.0 + z[i] * (1.0 - s));
        }
    }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "silu"; }

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "silu") return Activation::silu;
    throw DomainError("unknown activation '" + name + "' (expected tanh or silu)");
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) n += weights[k].size() + biases[k].size();
    return n;
}

void MlpParams::fill(double value) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights[k].fill(value);
        biases[k].fill(value);
    }
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        flat.insert(flat.end(), weights[k].flat().begin(), weights[k].flat().end());
        flat.insert(flat.end(), biases[k].flat().begin(), biases[k].flat().end());
    }
    return flat;
}

void MlpParams::assign_flat(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ShapeError("flat parameter length " + std::to_string(flat.size()) + " != expected " +
                         std::to_string(parameter_count()));
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (double& v : weights[k].flat()) v = flat[pos++];
        for (double& v : biases[k].flat()) v = flat[pos++];
    }
}

double& MlpParams::flat_at(std::size_t index) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (index < weights[k].size()) return weights[k].flat()[index];
        index -= weights[k].size();
        if (index < biases[k].size()) return biases[k].flat()[index];
        index -= biases[k].size();
    }
    throw ShapeError("parameter index out of range");
}

Mlp::Mlp(std::vector<std::size_t> layer_dims, Activation activation)
    : dims_(std::move(layer_dims)), activation_(activation) {
    if (dims_.size() < 2) throw ShapeError("an Mlp needs at least input and output dims");
    for (std::size_t d : dims_) {
        if (d == 0) throw ShapeError("Mlp layer dims must be positive");
    }
    for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
        params_.weights.emplace_back(dims_[k + 1], dims_[k]);
        params_.biases.emplace_back(dims_[k + 1], 1);
    }
}

Mlp Mlp::glorot(std::vector<std::size_t> layer_dims, Activation activation, RngStream& rng) {
    Mlp m(std::move(layer_dims), activation);
    for (auto& w : m.params_.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (double& v : w.flat()) v = rng.uniform(-limit, limit);
    }
    return m;
}

Mlp Mlp::zeros(std::vector<std::size_t> layer_dims, Activation activation) {
    return Mlp(std::move(layer_dims), activation);
}

MlpGrads Mlp::zero_grads() const {
    MlpGrads g = params_;
    g.fill(0.0);
    return g;
}

void Mlp::check_input(const Tensor& input) const {
    if (input.cols() != input_dim()) {
        throw ShapeError("Mlp input has " + std::to_string(input.cols()) + " columns, expected " +
                         std::to_string(input_dim()));
    }
}

Tensor Mlp::forward(const Tensor& input) const {
    MlpCache cache;
    return forward(input, cache);
}

Tensor Mlp::forward(const Tensor& input, MlpCache& cache) const {
    check_input(input);
    forward_calls_.bump();
    const std::size_t n_layers = params_.num_layers();
    cache.inputs.resize(n_layers);
    cache.pre.resize(n_layers);
    cache.inputs[0] = input;
    Tensor out;
    for (std::size_t k = 0; k < n_layers; ++k) {
        const Tensor& x = cache.inputs[k];
        Tensor& z = cache.pre[k];
        z = Tensor(x.rows(), dims_[k + 1]);
        auto zm = as_matrix(z);
        zm.noalias() = as_matrix(x) * as_matrix(params_.weights[k]).transpose();
        zm.rowwise() += ConstMapVec(params_.biases[k].data(), dims_[k + 1]);
        if (k + 1 < n_layers) {
            cache.inputs[k + 1] = Tensor(x.rows(), dims_[k + 1]);
            activate(activation_, z, cache.inputs[k + 1]);
        } else {
            out = z;
        }
    }
    return out;
}

void Mlp::backward(const MlpCache& cache, const Tensor& upstream, MlpGrads& grads, Tensor* input_grad) const {
    const std::size_t n_layers = params_.num_layers();
    if (cache.pre.size() != n_layers) throw ShapeError("Mlp backward called without a matching forward cache");
    const std::size_t batch = cache.inputs[0].rows();
    if (upstream.rows() != batch || upstream.cols() != output_dim()) {
        throw ShapeError("Mlp upstream gradient has shape " + upstream.shape_string() + ", expected (" +
                         std::to_string(batch) + ", " + std::to_string(output_dim()) + ")");
    }
    if (grads.num_layers() != n_layers) throw ShapeError("gradient buffer does not match Mlp layout");

    Tensor delta = upstream;
    for (std::size_t k = n_layers; k-- > 0;) {
        if (k + 1 < n_layers) activation_backward(activation_, cache.pre[k], cache.inputs[k + 1], delta);
        const auto dz = as_matrix(std::as_const(delta));
        as_matrix(grads.weights[k]).noalias() += dz.transpose() * as_matrix(cache.inputs[k]);
        MapVec(grads.biases[k].data(), dims_[k + 1]) += dz.colwise().sum();
        if (k > 0 || input_grad != nullptr) {
            Tensor prev(batch, dims_[k]);
            as_matrix(prev).noalias() = dz * as_matrix(params_.weights[k]);
            delta = std::move(prev);
        }
    }
    if (input_grad != nullptr) *input_grad = std::move(delta);
}

BackwardResult mlp_backward(const Mlp& model, const Tensor& input, const Tensor& upstream) {
    MlpCache cache;
    model.forward(input, cache);
    BackwardResult result{model.zero_grads(), Tensor()};
    model.backward(cache, upstream, result.param_grads, &result.input_grad);
    return result;
}

}  // namespace auxfm
