#include "auxfm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace auxfm {

GradCheckReport finite_diff_check(const Mlp& model, const LossFn& loss, double tolerance, double step,
                                  double scale_floor) {
    GradCheckReport report;
    report.tolerance = tolerance;

    MlpGrads analytic = model.zero_grads();
    loss(model, &analytic);
    const std::vector<double> grad_flat = analytic.flatten();

    Mlp probe = model;
    const std::size_t n = probe.parameter_count();
    for (std::size_t i = 0; i < n; ++i) {
        double& p = probe.params().flat_at(i);
        const double saved = p;
        p = saved + step;
        const double up = loss(probe, nullptr);
        p = saved - step;
        const double down = loss(probe, nullptr);
        p = saved;

        const double numeric = (up - down) / (2.0 * step);
        const double a = grad_flat[i];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), scale_floor});
        if (i == 0 || rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    report.passed = report.max_rel_error < tolerance;
    return report;
}

}  // namespace auxfm
