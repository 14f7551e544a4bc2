#include "auxfm/datasets.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

// Angle 2 pi k / K on the unit circle; quarter turns are returned exactly.
std::pair<double, double> unit_circle(std::size_t k, std::size_t num_modes) {
    if ((4 * k) % num_modes == 0) {
        switch ((4 * k / num_modes) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_modes);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

void LabeledDataset::validate() const {
    if (labels.size() != points.rows()) {
        throw ShapeError("dataset has " + std::to_string(points.rows()) + " points but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (mode_centers.cols() != points.cols() && points.rows() > 0) {
        throw ShapeError("mode centers dim does not match point dim");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes()) {
            throw DomainError("dataset label " + std::to_string(y) + " outside [0, " +
                              std::to_string(num_classes()) + ")");
        }
    }
    if (!mode_centers.all_finite()) throw NumericError("non-finite mode center");
}

std::vector<double> LabeledDataset::class_mean(int k) const {
    std::vector<double> mean(dim(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        if (labels[i] != k) continue;
        ++count;
        for (std::size_t c = 0; c < dim(); ++c) mean[c] += points(i, c);
    }
    if (count == 0) throw DomainError("class " + std::to_string(k) + " has no points");
    for (double& v : mean) v /= static_cast<double>(count);
    return mean;
}

std::vector<double> LabeledDataset::global_mean() const {
    if (size() == 0) throw DomainError("global mean of an empty dataset");
    std::vector<double> mean(dim(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t c = 0; c < dim(); ++c) mean[c] += points(i, c);
    }
    for (double& v : mean) v /= static_cast<double>(size());
    return mean;
}

LabeledDataset make_ring(std::size_t num_modes, std::size_t n_per_mode, double jitter, RngStream& rng) {
    if (num_modes == 0) throw DomainError("ring needs at least one mode");
    if (!(jitter >= 0.0)) throw DomainError("ring jitter must be nonnegative");
    LabeledDataset ds;
    ds.mode_centers = Tensor(num_modes, 2);
    for (std::size_t k = 0; k < num_modes; ++k) {
        const auto [cx, cy] = unit_circle(k, num_modes);
        ds.mode_centers(k, 0) = cx;
        ds.mode_centers(k, 1) = cy;
    }
    ds.points = Tensor(num_modes * n_per_mode, 2);
    ds.labels.reserve(num_modes * n_per_mode);
    for (std::size_t k = 0; k < num_modes; ++k) {
        for (std::size_t i = 0; i < n_per_mode; ++i) {
            const std::size_t r = k * n_per_mode + i;
            const double jx = rng.normal();
            const double jy = rng.normal();
            ds.points(r, 0) = ds.mode_centers(k, 0) + jitter * jx;
            ds.points(r, 1) = ds.mode_centers(k, 1) + jitter * jy;
            ds.labels.push_back(static_cast<int>(k));
        }
    }
    return ds;
}

LabeledDataset make_bimodal_ring(double separation, double jitter, std::size_t n, RngStream& rng) {
    if (!(separation > 0.0)) throw DomainError("bimodal separation must be positive");
    if (!(jitter >= 0.0)) throw DomainError("bimodal jitter must be nonnegative");
    LabeledDataset ds;
    ds.mode_centers = Tensor::from_rows({{separation / 2.0, 0.0}, {-separation / 2.0, 0.0}});
    ds.points = Tensor(n, 2);
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double jx = rng.normal();
        const double jy = rng.normal();
        ds.points(i, 0) = ds.mode_centers(static_cast<std::size_t>(y), 0) + jitter * jx;
        ds.points(i, 1) = ds.mode_centers(static_cast<std::size_t>(y), 1) + jitter * jy;
        ds.labels.push_back(y);
    }
    return ds;
}

LabeledDataset make_point(std::vector<double> point, std::size_t copies) {
    if (point.empty()) throw DomainError("point dataset needs a non-empty point");
    const std::size_t d = point.size();
    LabeledDataset ds;
    ds.mode_centers = Tensor(1, d, point);
    ds.points = Tensor(copies, d);
    for (std::size_t i = 0; i < copies; ++i) {
        for (std::size_t c = 0; c < d; ++c) ds.points(i, c) = point[c];
    }
    ds.labels.assign(copies, 0);
    return ds;
}

Tensor sample_base(RngStream& rng, std::size_t dim, std::size_t batch, double sigma) {
    Tensor x(batch, dim);
    for (double& v : x.flat()) v = sigma * rng.normal();
    return x;
}

}  // namespace auxfm
