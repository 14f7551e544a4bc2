#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "auxfm/model.hpp"
#include "auxfm/paths.hpp"
#include "auxfm/tensor.hpp"

namespace auxfm {

struct SampleConfig {
    std::size_t steps = 100;
    std::size_t batch = 2000;
    std::uint64_t seed = 0;
    double guidance = 1.0;
    bool record_trajectory = false;
    double base_sigma = 1.0;
    PathSchedule schedule = PathSchedule::linear_bump();

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;   // N + 1 values from 0 to 1
    std::vector<Tensor> states;  // N + 1 states of shape (batch, d)
};

struct SampleResult {
    Tensor samples;
    std::optional<Trajectory> trajectory;
    std::size_t velocity_evaluations = 0;   // batched calls of v_theta
    std::size_t prototype_evaluations = 0;  // batched calls of F_phi
};

/// Any field v(x, t) evaluated on a whole batch.
using VectorField = std::function<Tensor(const Tensor& x, double t)>;

/// Left-endpoint Euler: x_{k+1} = x_k + v(x_k, k/N) / N, k = 0..N-1.
/// Throws NumericError naming the step when a state becomes non-finite.
SampleResult integrate_euler(const VectorField& field, Tensor x0, std::size_t steps, bool record,
                             double t_end = 1.0);

/// Initial noise for a sampling run: N(0, base_sigma^2 I) from the "noise" sub-stream of cfg.seed.
Tensor initial_noise(const SampleConfig& cfg, std::size_t dim);

/// Plain sampling of dx/dt = v_theta(x, t). `labels` only for label-conditioned models.
SampleResult euler_sample(const VelocityModel& model, const SampleConfig& cfg, std::span<const int> labels = {});

/// dx/dt = v_theta(x, t) + c'(t) F_phi(y). `labels` has one entry per sample.
SampleResult conditional_sample(const VelocityModel& model, const PrototypeModel& proto,
                                std::span<const int> labels, const SampleConfig& cfg);

/// Trajectory-level guidance: eta_cfg = F(null) + w (F(y) - F(null)), evaluated
/// as (1 - w) F(null) + w F(y) so that w = 1 reproduces conditional_sample
/// exactly. One v_theta call per step.
SampleResult cfg_sample(const VelocityModel& model, const PrototypeModel& proto, std::span<const int> labels,
                        const SampleConfig& cfg);

/// eta_u + w (eta_c - eta_u) computed as (1 - w) eta_u + w eta_c.
Tensor guided_eta(const Tensor& eta_conditional, const Tensor& eta_null, double w);

/// Same label for every sample in the batch.
std::vector<int> repeat_label(int label, std::size_t batch);

/// CSV with header sample_id,step,t,x_0..x_{d-1}; values printed with 17
/// significant digits.
void export_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace auxfm
