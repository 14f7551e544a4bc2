#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "auxfm/mlp.hpp"
#include "auxfm/rng.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

/// Label value selecting the null (unconditional) prototype.
inline constexpr int kNullLabel = -1;

struct NetShape {
    std::vector<std::size_t> hidden{64, 64};
    Activation activation = Activation::tanh;
};

/// Velocity network v_theta(x, t) on R^d. The network input is the row
/// [x, t] and, for label-conditioned models, a one-hot class code appended after t.
class VelocityModel {
public:
    VelocityModel() = default;
    VelocityModel(Mlp net, std::size_t dim, std::size_t num_classes = 0);

    static VelocityModel create(std::size_t dim, const NetShape& shape, RngStream& rng, std::size_t num_classes = 0);
    static VelocityModel zeros(std::size_t dim, const NetShape& shape, std::size_t num_classes = 0);

    std::size_t dim() const { return dim_; }
    std::size_t num_classes() const { return num_classes_; }
    bool label_conditioned() const { return num_classes_ > 0; }
    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

    /// Assembles the network input. `t` holds one time per row; `labels` is
    /// required (one per row, in [0, K)) exactly when the model is label-conditioned.
    Tensor features(const Tensor& x, std::span<const double> t, std::span<const int> labels = {}) const;

private:
    Mlp net_;
    std::size_t dim_ = 0;
    std::size_t num_classes_ = 0;
};

/// Velocity at a shared time t for every row of x.
Tensor velocity(const VelocityModel& model, const Tensor& x, double t, std::span<const int> labels = {});
/// Velocity with one time per row.
Tensor velocity_rows(const VelocityModel& model, const Tensor& x, std::span<const double> t,
                     std::span<const int> labels = {});

/// Prototype network F_phi: one-hot over K classes plus a trailing null slot -> R^d.
class PrototypeModel {
public:
    PrototypeModel() = default;
    PrototypeModel(Mlp net, std::size_t num_classes);

    /// Default shape: one tanh hidden layer of width 32.
    static PrototypeModel create(std::size_t num_classes, std::size_t dim, RngStream& rng,
                                 const NetShape& shape = {{32}, Activation::tanh});
    static PrototypeModel zeros(std::size_t num_classes, std::size_t dim,
                                const NetShape& shape = {{32}, Activation::tanh});

    std::size_t num_classes() const { return num_classes_; }
    std::size_t dim() const { return net_.output_dim(); }
    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

    /// One-hot codes, one row per label; kNullLabel maps to index K.
    Tensor encode(std::span<const int> labels) const;

private:
    Mlp net_;
    std::size_t num_classes_ = 0;
};

/// F_phi(y) as a (1, d) tensor; y may be kNullLabel.
Tensor prototype(const PrototypeModel& model, int label);
/// F_phi evaluated row-wise for a batch of labels.
Tensor prototypes(const PrototypeModel& model, std::span<const int> labels);
/// Copy whose outputs are multiplied by s (the output layer is rescaled).
PrototypeModel scaled_prototype(const PrototypeModel& model, double s);

}  // namespace auxfm
