#pragma once

#include <cstddef>
#include <vector>

#include "auxfm/rng.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

struct LabeledDataset {
    Tensor points;             // (n, d)
    std::vector<int> labels;   // n entries in [0, K)
    Tensor mode_centers;       // (K, d)

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
    std::size_t num_classes() const { return mode_centers.rows(); }

    /// Checks the label/center invariants, throwing on violation.
    void validate() const;
    /// Empirical mean of the points with label k.
    std::vector<double> class_mean(int k) const;
    std::vector<double> global_mean() const;
};

/// K modes at (cos 2 pi k/K, sin 2 pi k/K), each with n_per_mode points jittered
/// by N(0, jitter^2 I). Points are ordered mode by mode.
LabeledDataset make_ring(std::size_t num_modes, std::size_t n_per_mode, double jitter, RngStream& rng);

/// Two clusters at (+separation/2, 0) [label 0] and (-separation/2, 0) [label 1];
/// labels alternate so the classes are balanced to within one point.
LabeledDataset make_bimodal_ring(double separation, double jitter, std::size_t n, RngStream& rng);

/// A single point with label 0 repeated `copies` times (the point-mass target).
LabeledDataset make_point(std::vector<double> point, std::size_t copies = 1);

/// (batch, dim) draws from N(0, sigma^2 I).
Tensor sample_base(RngStream& rng, std::size_t dim, std::size_t batch, double sigma = 1.0);

}  // namespace auxfm
