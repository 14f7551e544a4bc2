#include "auxfm/model.hpp"

#include <cmath>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

std::vector<std::size_t> layer_dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

}  // namespace

VelocityModel::VelocityModel(Mlp net, std::size_t dim, std::size_t num_classes)
    : net_(std::move(net)), dim_(dim), num_classes_(num_classes) {
    if (net_.output_dim() != dim_) {
        throw ShapeError("velocity net outputs " + std::to_string(net_.output_dim()) + " dims, data has " +
                         std::to_string(dim_));
    }
    if (net_.input_dim() != dim_ + 1 + num_classes_) {
        throw ShapeError("velocity net input dim " + std::to_string(net_.input_dim()) + " != d + 1 + K = " +
                         std::to_string(dim_ + 1 + num_classes_));
    }
}

VelocityModel VelocityModel::create(std::size_t dim, const NetShape& shape, RngStream& rng, std::size_t num_classes) {
    return VelocityModel(Mlp::glorot(layer_dims(dim + 1 + num_classes, shape.hidden, dim), shape.activation, rng), dim,
                         num_classes);
}

VelocityModel VelocityModel::zeros(std::size_t dim, const NetShape& shape, std::size_t num_classes) {
    return VelocityModel(Mlp::zeros(layer_dims(dim + 1 + num_classes, shape.hidden, dim), shape.activation), dim,
                         num_classes);
}

Tensor VelocityModel::features(const Tensor& x, std::span<const double> t, std::span<const int> labels) const {
    if (x.cols() != dim_) {
        throw ShapeError("velocity input has dim " + std::to_string(x.cols()) + ", model expects " +
                         std::to_string(dim_));
    }
    if (t.size() != x.rows()) throw ShapeError("velocity: one time value per row required");
    if (label_conditioned()) {
        if (labels.size() != x.rows()) {
            throw ShapeError("label-conditioned velocity needs one label per row (got " +
                             std::to_string(labels.size()) + " for " + std::to_string(x.rows()) + " rows)");
        }
    } else if (!labels.empty()) {
        throw ShapeError("labels passed to an unconditional velocity model");
    }
    Tensor in(x.rows(), net_.input_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < dim_; ++c) in(r, c) = x(r, c);
        in(r, dim_) = t[r];
        if (label_conditioned()) {
            const int y = labels[r];
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) {
                throw DomainError("label " + std::to_string(y) + " out of range [0, " + std::to_string(num_classes_) +
                                  ")");
            }
            in(r, dim_ + 1 + static_cast<std::size_t>(y)) = 1.0;
        }
    }
    return in;
}

Tensor velocity(const VelocityModel& model, const Tensor& x, double t, std::span<const int> labels) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("velocity time t=" + std::to_string(t) + " outside [0, 1]");
    const std::vector<double> times(x.rows(), t);
    return model.net().forward(model.features(x, times, labels));
}

Tensor velocity_rows(const VelocityModel& model, const Tensor& x, std::span<const double> t,
                     std::span<const int> labels) {
    return model.net().forward(model.features(x, t, labels));
}

PrototypeModel::PrototypeModel(Mlp net, std::size_t num_classes) : net_(std::move(net)), num_classes_(num_classes) {
    if (net_.input_dim() != num_classes_ + 1) {
        throw ShapeError("prototype net input dim " + std::to_string(net_.input_dim()) + " != K + 1 = " +
                         std::to_string(num_classes_ + 1));
    }
}

PrototypeModel PrototypeModel::create(std::size_t num_classes, std::size_t dim, RngStream& rng,
                                      const NetShape& shape) {
    return PrototypeModel(Mlp::glorot(layer_dims(num_classes + 1, shape.hidden, dim), shape.activation, rng),
                          num_classes);
}

PrototypeModel PrototypeModel::zeros(std::size_t num_classes, std::size_t dim, const NetShape& shape) {
    return PrototypeModel(Mlp::zeros(layer_dims(num_classes + 1, shape.hidden, dim), shape.activation), num_classes);
}

Tensor PrototypeModel::encode(std::span<const int> labels) const {
    Tensor code(labels.size(), num_classes_ + 1);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const int y = labels[r];
        if (y == kNullLabel) {
            code(r, num_classes_) = 1.0;
        } else if (y >= 0 && static_cast<std::size_t>(y) < num_classes_) {
            code(r, static_cast<std::size_t>(y)) = 1.0;
        } else {
            throw DomainError("prototype label " + std::to_string(y) + " out of range [0, " +
                              std::to_string(num_classes_) + ") and not the null label");
        }
    }
    return code;
}

Tensor prototype(const PrototypeModel& model, int label) {
    const int labels[1] = {label};
    return model.net().forward(model.encode(labels));
}

Tensor prototypes(const PrototypeModel& model, std::span<const int> labels) {
    return model.net().forward(model.encode(labels));
}

PrototypeModel scaled_prototype(const PrototypeModel& model, double s) {
    if (!std::isfinite(s)) throw DomainError("prototype scale must be finite");
    PrototypeModel out = model;
    MlpParams& p = out.net().params();
    p.weights.back() *= s;
    p.biases.back() *= s;
    return out;
}

}  // namespace auxfm
