#pragma once

#include <functional>
#include <string>
#include <vector>

#include "auxfm/tensor.hpp"

namespace auxfm {

/// A scalar function of t on [0, 1] together with its closed-form derivative.
struct Coefficient {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static Coefficient identity();    // t
    static Coefficient complement();  // 1 - t
    static Coefficient bump();        // t (1 - t)
    static Coefficient zero();
};

struct PathCoeffs {
    double a, b, c;
    double a_dot, b_dot, c_dot;
};

/// Path X_t = a(t) x1 + b(t) x0 + c(t) eta.
///
/// Construction verifies the boundary values a(0)=0, a(1)=1, b(0)=1, b(1)=0,
/// c(0)=c(1)=0 to 1e-12 and that each derivative agrees with central
/// differences of its value to 1e-6 on a 101-point grid.
class PathSchedule {
public:
    PathSchedule(std::string name, Coefficient a, Coefficient b, Coefficient c);

    /// a = t, b = 1 - t, c = t (1 - t).
    static PathSchedule linear_bump();
    /// a = t, b = 1 - t, c = 0 (plain linear flow matching path).
    static PathSchedule linear_zero();
    /// a = sin(pi t / 2), b = cos(pi t / 2), c = t (1 - t).
    static PathSchedule trig_bump();

    /// Looks up `linear_bump` or `custom:<name>` in the schedule registry.
    static PathSchedule from_name(const std::string& id);
    static void register_custom(const std::string& name, std::function<PathSchedule()> factory);
    static std::vector<std::string> registered_names();

    const std::string& name() const { return name_; }
    PathCoeffs coeffs(double t) const;

private:
    std::string name_;
    Coefficient a_, b_, c_;
};

/// a(t) x1 + b(t) x0 + c(t) eta, element-wise. All three tensors must share a shape.
Tensor interpolate(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta, double t);
/// a'(t) x1 + b'(t) x0 + c'(t) eta.
Tensor path_velocity(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta, double t);

/// Per-row times: row i uses t[i]. Used by training, which draws one t per sample.
Tensor interpolate_rows(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta,
                        std::span<const double> t);
Tensor path_velocity_rows(const PathSchedule& schedule, const Tensor& x0, const Tensor& x1, const Tensor& eta,
                          std::span<const double> t, bool include_eta_term = true);

}  // namespace auxfm
