#pragma once

#include <span>
#include <string>

#include "auxfm/sample.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

/// Fixed 16-color palette; labels index it modulo 16, unlabeled rows use gray.
const char* label_color(int label);

/// One polyline per sample through its recorded states (first two coordinates),
/// viewBox fitted to the data bounding box plus a 10% margin.
std::string trajectories_svg(const Trajectory& traj, std::span<const int> labels = {});

/// Scatter plot of points (first two coordinates) colored by label, with optional
/// mode centers drawn as black crosses.
std::string scatter_svg(const Tensor& points, std::span<const int> labels = {}, const Tensor* centers = nullptr);

}  // namespace auxfm
