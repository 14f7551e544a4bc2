#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "auxfm/rng.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

class PrototypeModel;
class AuxSpec;

namespace aux {

struct Zero {};
struct Gaussian {
    double sigma = 1.0;
};
struct Uniform {
    double low = -1.0;
    double high = 1.0;
};
struct Laplace {
    double loc = 0.0;
    double scale = 1.0;
};
struct Rademacher {};
/// A single fixed vector; mostly useful as a mixture component.
struct PointMass {
    std::vector<double> value;
};
struct Mixture {
    std::vector<AuxSpec> components;
    std::vector<double> weights;
};

enum class X0Map { identity, negate, tanh };

/// eta = map(x0), row by row.
struct DeterministicOfX0 {
    X0Map map = X0Map::identity;
};
/// eta = F_phi(y) for the labels supplied in the sampling context.
struct Prototype {
    std::shared_ptr<const PrototypeModel> model;
};

}  // namespace aux

/// Description of the auxiliary distribution p_eta. Every draw is multiplied by
/// `scale()` (1 by default).
class AuxSpec {
public:
    using Kind = std::variant<aux::Zero, aux::Gaussian, aux::Uniform, aux::Laplace, aux::Rademacher, aux::PointMass,
                              aux::Mixture, aux::DeterministicOfX0, aux::Prototype>;

    AuxSpec() : kind_(aux::Zero{}) {}
    /// Validates parameters: Mixture weights nonnegative and summing to 1 within
    /// 1e-12, Uniform low <= high, positive Gaussian sigma / Laplace scale, non-null
    /// prototype model.
    AuxSpec(Kind kind, double scale = 1.0);

    static AuxSpec zero() { return AuxSpec(aux::Zero{}); }
    static AuxSpec gaussian(double sigma = 1.0) { return AuxSpec(aux::Gaussian{sigma}); }
    static AuxSpec uniform(double low = -1.0, double high = 1.0) { return AuxSpec(aux::Uniform{low, high}); }
    static AuxSpec laplace(double loc = 0.0, double scale = 1.0) { return AuxSpec(aux::Laplace{loc, scale}); }
    static AuxSpec rademacher() { return AuxSpec(aux::Rademacher{}); }
    static AuxSpec point_mass(std::vector<double> value) { return AuxSpec(aux::PointMass{std::move(value)}); }
    static AuxSpec mixture(std::vector<AuxSpec> components, std::vector<double> weights) {
        return AuxSpec(aux::Mixture{std::move(components), std::move(weights)});
    }
    static AuxSpec of_x0(aux::X0Map map = aux::X0Map::identity) { return AuxSpec(aux::DeterministicOfX0{map}); }
    static AuxSpec prototype(std::shared_ptr<const PrototypeModel> model) {
        return AuxSpec(aux::Prototype{std::move(model)});
    }

    const Kind& kind() const { return kind_; }
    double scale() const { return scale_; }
    AuxSpec with_scale(double scale) const { return AuxSpec(kind_, scale); }
    std::string tag() const;

    bool is_zero() const { return std::holds_alternative<aux::Zero>(kind_); }
    bool needs_labels() const;
    bool needs_x0() const;

private:
    Kind kind_;
    double scale_ = 1.0;
};

/// Optional per-batch context for the dependent families.
struct AuxContext {
    const Tensor* x0 = nullptr;
    std::span<const int> labels;
};

/// Draws a (batch, dim) tensor of eta samples.
Tensor sample_eta(const AuxSpec& spec, RngStream& rng, std::size_t dim, std::size_t batch,
                  const AuxContext& context = {});

/// Inverse CDF of Laplace(loc, scale) for u in (0, 1).
double laplace_inverse_cdf(double u, double loc = 0.0, double scale = 1.0);

std::string to_string(aux::X0Map map);
aux::X0Map x0_map_from_string(const std::string& name);

}  // namespace auxfm
