#pragma once

#include <cstddef>
#include <functional>

#include "auxfm/mlp.hpp"

namespace auxfm {

/// A deterministic scalar loss of the model parameters. When `grads` is non-null
/// the callee must also accumulate the analytic gradient into it.
using LossFn = std::function<double(const Mlp& model, MlpGrads* grads)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;  // flat parameter index, see MlpParams::flatten
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Compares analytic gradients against central differences for every parameter.
/// Relative error is |a - n| / max(|a|, |n|, scale_floor); below the floor the
/// comparison is effectively absolute.
GradCheckReport finite_diff_check(const Mlp& model, const LossFn& loss, double tolerance, double step = 1e-5,
                                  double scale_floor = 1e-5);

}  // namespace auxfm
