#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "auxfm/model.hpp"
#include "auxfm/paths.hpp"
#include "auxfm/rng.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

// ---------------------------------------------------------------------------
// Generation quality on labeled mode datasets.

/// Fraction of samples whose nearest center (lowest index on ties) equals the target label.
double mode_accuracy(const Tensor& samples, std::span<const int> target_labels, const Tensor& mode_centers);
/// Mean Euclidean distance from each sample to its nearest center.
double distance_error(const Tensor& samples, const Tensor& mode_centers);
/// Index of the nearest center for every row.
std::vector<int> nearest_centers(const Tensor& samples, const Tensor& mode_centers);

// ---------------------------------------------------------------------------
// Two-sample statistics.

/// V-statistic energy distance 2 E|A-B| - E|A-A'| - E|B-B'| (all pairs, diagonal
/// included). Zero for identical clouds and never negative.
double energy_distance(const Tensor& a, const Tensor& b);

struct PermutationTest {
    double statistic = 0.0;
    double threshold = 0.0;  // requested quantile of the permutation null
    double p_value = 1.0;
    std::size_t permutations = 0;
    bool rejected() const { return statistic > threshold; }
};

/// Energy-distance permutation test. Pairwise distances are evaluated in single
/// precision with double accumulation.
PermutationTest energy_permutation_test(const Tensor& a, const Tensor& b, std::size_t permutations, double quantile,
                                        RngStream& rng);

// ---------------------------------------------------------------------------
// Closed-form marginal fields.

/// Finite-support problem: X1 and eta are weighted atoms, X0 ~ N(0, sigma0^2 I).
struct OracleInstance {
    Tensor x1_atoms;  // (m, d)
    std::vector<double> x1_weights;
    Tensor eta_atoms;  // (r, d)
    std::vector<double> eta_weights;
    double sigma0 = 0.1;
    PathSchedule schedule = PathSchedule::linear_bump();

    std::size_t dim() const { return x1_atoms.cols(); }
    void validate() const;

    /// Three X1 atoms and two eta atoms in 2D with sigma0 = 0.1.
    static OracleInstance finite_support_default();
};

struct FieldOptions {
    /// Multiplies a'(t) in the component velocities; 2 gives the negative control.
    double adot_scale = 1.0;
};

/// u_t(x) for the finite-support instance at a shared time t (requires b(t) != 0).
/// Mixture weights are normalized in log space.
Tensor exact_marginal_field(const OracleInstance& inst, const Tensor& x, double t, const FieldOptions& opts = {});
Tensor exact_marginal_field_rows(const OracleInstance& inst, const Tensor& x, std::span<const double> t,
                                 const FieldOptions& opts = {});

/// u_t(x) for X1 = delta(x1), X0 ~ N(0, sigma0^2 I), eta ~ N(0, eta_sigma^2 I):
/// a' x1 + (b' b sigma0^2 + c' c eta_sigma^2) / (b^2 sigma0^2 + c^2 eta_sigma^2) (x - a x1).
Tensor analytic_gaussian_field(const Tensor& x, double t, std::span<const double> x1, double sigma0,
                               const PathSchedule& schedule, double eta_sigma = 1.0);

// ---------------------------------------------------------------------------
// Path samplers and Monte-Carlo conditioning.

/// Draws n pairs (X_t, dX_t/dt) at a fixed t.
using PathPairSampler = std::function<void(double t, std::size_t n, RngStream& rng, Tensor& xt, Tensor& xdot)>;

PathPairSampler finite_support_sampler(const OracleInstance& inst);
PathPairSampler gaussian_point_sampler(std::vector<double> x1, double sigma0, PathSchedule schedule,
                                       double eta_sigma = 1.0);

struct ConditionalEstimate {
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::size_t accepted = 0;
    std::size_t drawn = 0;
};

/// E[dX_t/dt | X_t in ball(x, radius)] by rejection, drawing until `target_accepts`
/// samples land in the ball (or `max_draws` is reached).
ConditionalEstimate conditional_velocity_mc(const PathPairSampler& sampler, std::span<const double> x, double t,
                                            double radius, std::size_t target_accepts, RngStream& rng,
                                            std::size_t max_draws = 200'000'000);

// ---------------------------------------------------------------------------
// Marginal-consistency check: particles pushed along the exact field versus
// direct draws of X_t.

Tensor sample_path_direct(const OracleInstance& inst, double t, std::size_t n, RngStream& rng);
Tensor push_particles(const OracleInstance& inst, std::size_t n, std::size_t steps, double t_eval, RngStream& rng,
                      const FieldOptions& opts = {});

struct ContinuityOptions {
    FieldOptions field;
    std::size_t permutations = 500;
    double quantile = 0.99;
    /// When set, skip the permutation test and compare against this threshold.
    std::optional<double> threshold;
};

struct ContinuityReport {
    double discrepancy = 0.0;  // energy distance
    double threshold = 0.0;
    double p_value = 1.0;
    bool passed = false;
};

ContinuityReport continuity_check(const OracleInstance& inst, std::size_t particles, std::size_t steps,
                                  double t_eval, std::uint64_t seed, const ContinuityOptions& opts = {});

// ---------------------------------------------------------------------------
// Loss equivalence: gradient of the marginal objective E|v - u_t(x)|^2 versus
// the conditional objective E|v - dX_t/dt|^2 on shared samples.

struct LossEquivalenceReport {
    std::vector<double> grad_marginal;
    std::vector<double> grad_conditional;
    double loss_marginal = 0.0;
    double loss_conditional = 0.0;
    double gap = 0.0;  // loss_marginal - loss_conditional
    double gap_stderr = 0.0;

    /// |g_marginal - g_conditional| / |g_marginal|.
    double grad_relative_l2() const;
};

struct LossEquivalenceStudy {
    std::vector<LossEquivalenceReport> reports;
    /// For k >= 1: z-score of mean(gap_k - gap_0) under paired per-sample differences.
    std::vector<double> gap_difference_z;
};

/// Evaluates every model on the same `num_samples` draws (t ~ U[0, 1)).
LossEquivalenceStudy loss_equivalence_study(const OracleInstance& inst, std::span<const VelocityModel> models,
                                            std::size_t num_samples, std::uint64_t seed,
                                            std::size_t chunk = 10000);

}  // namespace auxfm
