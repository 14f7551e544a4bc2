#include "auxfm/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "auxfm/error.hpp"
#include "auxfm/model.hpp"

namespace auxfm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void validate(const AuxSpec::Kind& kind) {
    std::visit(Overloaded{
                   [](const aux::Gaussian& g) {
                       if (!(g.sigma > 0.0)) throw DomainError("Gaussian aux sigma must be positive");
                   },
                   [](const aux::Uniform& u) {
                       if (!(u.low <= u.high)) throw DomainError("Uniform aux requires low <= high");
                   },
                   [](const aux::Laplace& l) {
                       if (!(l.scale > 0.0)) throw DomainError("Laplace aux scale must be positive");
                   },
                   [](const aux::Mixture& m) {
                       if (m.components.empty()) throw DomainError("mixture needs at least one component");
                       if (m.components.size() != m.weights.size()) {
                           throw DomainError("mixture has " + std::to_string(m.components.size()) +
                                             " components but " + std::to_string(m.weights.size()) + " weights");
                       }
                       for (double w : m.weights) {
                           if (!(w >= 0.0)) throw DomainError("mixture weights must be nonnegative");
                       }
                       const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
                       if (std::abs(total - 1.0) > 1e-12) {
                           throw DomainError("mixture weights sum to " + std::to_string(total) + ", expected 1");
                       }
                       for (const auto& c : m.components) {
                           if (c.needs_labels() || c.needs_x0()) {
                               throw DomainError("mixture components must be context-free distributions");
                           }
                       }
                   },
                   [](const aux::Prototype& p) {
                       if (!p.model) throw DomainError("prototype aux requires a model");
                   },
                   [](const auto&) {},
               },
               kind);
}

double apply_map(aux::X0Map map, double v) {
    switch (map) {
        case aux::X0Map::identity: return v;
        case aux::X0Map::negate: return -v;
        case aux::X0Map::tanh: return std::tanh(v);
    }
    return v;
}

// Fills `row` with one draw from a context-free family.
void sample_row(const AuxSpec& spec, RngStream& rng, std::span<double> row) {
    std::visit(Overloaded{
                   [&](const aux::Zero&) { std::fill(row.begin(), row.end(), 0.0); },
                   [&](const aux::Gaussian& g) {
                       for (double& v : row) v = g.sigma * rng.normal();
                   },
                   [&](const aux::Uniform& u) {
                       for (double& v : row) v = rng.uniform(u.low, u.high);
                   },
                   [&](const aux::Laplace& l) {
                       for (double& v : row) v = laplace_inverse_cdf(rng.uniform_open(), l.loc, l.scale);
                   },
                   [&](const aux::Rademacher&) {
                       for (double& v : row) v = (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
                   },
                   [&](const aux::PointMass& p) {
                       if (p.value.size() != row.size()) {
                           throw ShapeError("point-mass aux has dim " + std::to_string(p.value.size()) +
                                            ", requested " + std::to_string(row.size()));
                       }
                       std::copy(p.value.begin(), p.value.end(), row.begin());
                   },
                   [&](const aux::Mixture& m) {
                       const double u = rng.uniform();
                       std::size_t k = 0;
                       double cumulative = m.weights[0];
                       while (u >= cumulative && k + 1 < m.weights.size()) cumulative += m.weights[++k];
                       sample_row(m.components[k], rng, row);
                   },
                   [&](const auto&) { throw DomainError("context-dependent aux cannot be sampled row-wise"); },
               },
               spec.kind());
    if (spec.scale() != 1.0) {
        for (double& v : row) v *= spec.scale();
    }
}

}  // namespace

AuxSpec::AuxSpec(Kind kind, double scale) : kind_(std::move(kind)), scale_(scale) {
    if (!std::isfinite(scale_)) throw DomainError("aux scale must be finite");
    validate(kind_);
}

std::string AuxSpec::tag() const {
    return std::visit(Overloaded{
                          [](const aux::Zero&) { return std::string("zero"); },
                          [](const aux::Gaussian&) { return std::string("gaussian"); },
                          [](const aux::Uniform&) { return std::string("uniform"); },
                          [](const aux::Laplace&) { return std::string("laplace"); },
                          [](const aux::Rademacher&) { return std::string("rademacher"); },
                          [](const aux::PointMass&) { return std::string("point"); },
                          [](const aux::Mixture&) { return std::string("mixture"); },
                          [](const aux::DeterministicOfX0&) { return std::string("x0_map"); },
                          [](const aux::Prototype&) { return std::string("prototype"); },
                      },
                      kind_);
}

bool AuxSpec::needs_labels() const { return std::holds_alternative<aux::Prototype>(kind_); }
bool AuxSpec::needs_x0() const { return std::holds_alternative<aux::DeterministicOfX0>(kind_); }

Tensor sample_eta(const AuxSpec& spec, RngStream& rng, std::size_t dim, std::size_t batch, const AuxContext& context) {
    Tensor eta(batch, dim);
    if (const auto* det = std::get_if<aux::DeterministicOfX0>(&spec.kind())) {
        if (context.x0 == nullptr) throw DomainError("x0_map aux requires x0 in the sampling context");
        if (context.x0->rows() != batch || context.x0->cols() != dim) {
            throw ShapeError("x0 context has shape " + context.x0->shape_string() + ", expected (" +
                             std::to_string(batch) + ", " + std::to_string(dim) + ")");
        }
        for (std::size_t i = 0; i < eta.size(); ++i) {
            eta.flat()[i] = spec.scale() * apply_map(det->map, context.x0->flat()[i]);
        }
        return eta;
    }
    if (const auto* proto = std::get_if<aux::Prototype>(&spec.kind())) {
        if (context.labels.empty() && batch > 0) throw DomainError("prototype aux requires labels in the context");
        if (context.labels.size() != batch) {
            throw ShapeError("prototype aux got " + std::to_string(context.labels.size()) + " labels for batch " +
                             std::to_string(batch));
        }
        if (proto->model->dim() != dim) {
            throw ShapeError("prototype model outputs dim " + std::to_string(proto->model->dim()) + ", requested " +
                             std::to_string(dim));
        }
        eta = prototypes(*proto->model, context.labels);
        if (spec.scale() != 1.0) eta *= spec.scale();
        return eta;
    }
    for (std::size_t r = 0; r < batch; ++r) sample_row(spec, rng, eta.row(r));
    return eta;
}

double laplace_inverse_cdf(double u, double loc, double scale) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("laplace_inverse_cdf needs u in (0, 1), got " + std::to_string(u));
    const double centered = u - 0.5;
    const double sign = centered > 0.0 ? 1.0 : (centered < 0.0 ? -1.0 : 0.0);
    return loc - scale * sign * std::log(1.0 - 2.0 * std::abs(centered));
}

std::string to_string(aux::X0Map map) {
    switch (map) {
        case aux::X0Map::identity: return "identity";
        case aux::X0Map::negate: return "negate";
        case aux::X0Map::tanh: return "tanh";
    }
    return "identity";
}

aux::X0Map x0_map_from_string(const std::string& name) {
    if (name == "identity") return aux::X0Map::identity;
    if (name == "negate") return aux::X0Map::negate;
    if (name == "tanh") return aux::X0Map::tanh;
    throw DomainError("unknown x0 map '" + name + "' (expected identity, negate or tanh)");
}

}  // namespace auxfm
