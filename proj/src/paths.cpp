#include "auxfm/paths.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kDerivativeTol = 1e-6;
constexpr double kFdStep = 1e-5;
constexpr int kGridPoints = 101;

void check_boundary(const Coefficient& coef, char symbol, double at0, double at1) {
    const double v0 = coef.value(0.0);
    const double v1 = coef.value(1.0);
    if (std::abs(v0 - at0) > kBoundaryTol || std::abs(v1 - at1) > kBoundaryTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "path coefficient " << symbol << " ('" << coef.name << "') violates boundary conditions: " << symbol
            << "(0)=" << v0 << " (want " << at0 << "), " << symbol << "(1)=" << v1 << " (want " << at1 << ")";
        throw DomainError(msg.str());
    }
}

// Central differences inside the grid, second-order one-sided at the ends so
// user tables never get evaluated outside [0, 1].
void check_derivative(const Coefficient& coef, char symbol) {
    const double h = kFdStep;
    for (int i = 0; i < kGridPoints; ++i) {
        const double t = static_cast<double>(i) / (kGridPoints - 1);
        double numeric;
        if (i == 0) {
            numeric = (-3.0 * coef.value(t) + 4.0 * coef.value(t + h) - coef.value(t + 2 * h)) / (2 * h);
        } else if (i == kGridPoints - 1) {
            numeric = (3.0 * coef.value(t) - 4.0 * coef.value(t - h) + coef.value(t - 2 * h)) / (2 * h);
        } else {
            numeric = (coef.value(t + h) - coef.value(t - h)) / (2 * h);
        }
        const double analytic = coef.derivative(t);
        if (std::abs(numeric - analytic) > kDerivativeTol) {
            std::ostringstream msg;
            msg << "derivative of path coefficient " << symbol << " ('" << coef.name << "') disagrees with finite "
                << "differences at t=" << t << ": closed form " << analytic << ", numeric " << numeric;
            throw DomainError(msg.str());
        }
    }
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, std::function<PathSchedule()>> factories{
        {"linear_zero", [] { return PathSchedule::linear_zero(); }},
        {"trig_bump", [] { return PathSchedule::trig_bump(); }},
    };
};

Registry& registry() {
    static Registry r;
    return r;
}

void check_time(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError("path time t=" + std::to_string(t) + " outside [0, 1]");
    }
}

void check_operands(const Tensor& x0, const Tensor& x1, const Tensor& eta) {
    require_same_shape(x0, x1, "path operands x0/x1");
    require_same_shape(x0, eta, "path operands x0/eta");
}

}  // namespace

Coefficient Coefficient::identity() {
    return {"t", [](double t) { return t; }, [](double) { return 1.0; }};
}

Coefficient Coefficient::complement() {
    return {"1-t", [](double t) { return 1.0 - t; }, [](double) { return -1.0; }};
}

Coefficient Coefficient::bump() {
    return {"t(1-t)", [](double t) { return t * (1.0 - t); }, [](double t) { return 1.0 - 2.0 * t; }};
}

Coefficient Coefficient::zero() {
    return {"0", [](double) { return 0.0; }, [](double) { return 0.0; }};
}

PathSchedule::PathSchedule(std::string name, Coefficient a, Coefficient b, Coefficient c)
    : name_(std::move(name)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    check_boundary(a_, 'a', 0.0, 1.0);
    check_boundary(b_, 'b', 1.0, 0.0);
    check_boundary(c_, 'c', 0.0, 0.0);
    check_derivative(a_, 'a');
    check_derivative(b_, 'b');
    check_derivative(c_, 'c');
}

PathSchedule PathSchedule::linear_bump() {
    return PathSchedule("linear_bump", Coefficient::identity(), Coefficient::complement(), Coefficient::bump());
}

PathSchedule PathSchedule::linear_zero() {
    return PathSchedule("custom:linear_zero", Coefficient::identity(), Coefficient::complement(),
                        Coefficient::zero());
}

PathSchedule PathSchedule::trig_bump() {
    constexpr double half_pi = std::numbers::pi / 2.0;
    Coefficient a{"sin(pi t/2)", [](double t) { return std::sin(half_pi * t); },
                  [](double t) { return half_pi * std::cos(half_pi * t); }};
    // cos(pi/2) is ~6e-17, inside the boundary tolerance.
    Coefficient b{"cos(pi t/2)", [](double t) { return std::cos(half_pi * t); },
                  [](double t) { return -half_pi * std::sin(half_pi * t); }};
    return PathSchedule("custom:trig_bump", std::move(a), std::move(b), Coefficient::bump());
}

PathSchedule PathSchedule::from_name(const std::string& id) {
    if (id == "linear_bump") return linear_bump();
    const std::string prefix = "custom:";
    if (id.rfind(prefix, 0) == 0) {
        const std::string name = id.substr(prefix.size());
        std::function<PathSchedule()> factory;
        {
            std::lock_guard lock(registry().mutex);
            auto it = registry().factories.find(name);
            if (it != registry().factories.end()) factory = it->second;
        }
        if (factory) return factory();
        throw DomainError("no custom path schedule registered as '" + name + "'");
    }
    throw DomainError("unknown path schedule '" + id + "' (expected linear_bump or custom:<name>)");
}

void PathSchedule::register_custom(const std::string& name, std::function<PathSchedule()> factory) {
    std::lock_guard lock(registry().mutex);
    registry().factories[name] = std::move(factory);
}

std::vector<std::string> PathSchedule::registered_names() {
    std::vector<std::string> names{"linear_bump"};
    std::lock_guard lock(registry().mutex);
    for (const auto& [name, _] : registry().factories) names.push_back("custom:" + name);
    return names;
}

PathCoeffs PathSchedule::coeffs(double t) const {
    check_time(t);
    return {a_.value(t), b_.value(t), c_.value(t), a_.derivative(t), b_.derivative(t), c_.derivative(t)};
}

Tensor interpolate(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta, double t) {
    check_operands(x0, x1, eta);
    const PathCoeffs k = schedule.coeffs(t);
    Tensor out(x0.rows(), x0.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.flat()[i] = k.a * x1.flat()[i] + k.b * x0.flat()[i] + k.c * eta.flat()[i];
    }
    return out;
}

Tensor path_velocity(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta, double t) {
    check_operands(x0, x1, eta);
    const PathCoeffs k = schedule.coeffs(t);
    Tensor out(x0.rows(), x0.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.flat()[i] = k.a_dot * x1.flat()[i] + k.b_dot * x0.flat()[i] + k.c_dot * eta.flat()[i];
    }
    return out;
}

Tensor interpolate_rows(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta,
                        std::span<const double> t) {
    check_operands(x0, x1, eta);
    if (t.size() != x0.rows()) throw ShapeError("interpolate_rows: one time per row required");
    Tensor out(x0.rows(), x0.cols());
    for (std::size_t r = 0; r < x0.rows(); ++r) {
        const PathCoeffs k = schedule.coeffs(t[r]);
        for (std::size_t c = 0; c < x0.cols(); ++c) out(r, c) = k.a * x1(r, c) + k.b * x0(r, c) + k.c * eta(r, c);
    }
    return out;
}

Tensor path_velocity_rows(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta,
                          std::span<const double> t, bool include_eta_term) {
    check_operands(x0, x1, eta);
    if (t.size() != x0.rows()) throw ShapeError("path_velocity_rows: one time per row required");
    Tensor out(x0.rows(), x0.cols());
    for (std::size_t r = 0; r < x0.rows(); ++r) {
        const PathCoeffs k = schedule.coeffs(t[r]);
        const double c_dot = include_eta_term ? k.c_dot : 0.0;
        for (std::size_t c = 0; c < x0.cols(); ++c) {
            out(r, c) = k.a_dot * x1(r, c) + k.b_dot * x0(r, c) + c_dot * eta(r, c);
        }
    }
    return out;
}

}  // namespace auxfm
