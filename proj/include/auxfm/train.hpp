#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "auxfm/adam.hpp"
#include "auxfm/auxiliary.hpp"
#include "auxfm/datasets.hpp"
#include "auxfm/model.hpp"
#include "auxfm/paths.hpp"

namespace auxfm {

enum class TrainMode { auxpath, conditional_two_stage, finetune };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainConfig {
    std::size_t steps = 20000;
    std::size_t batch = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    PathSchedule schedule = PathSchedule::linear_bump();
    /// In the conditional modes only aux.scale() is used: eta = scale * F_phi(y).
    AuxSpec aux;
    LabeledDataset dataset;
    TrainMode mode = TrainMode::auxpath;
    std::size_t prototype_steps = 2000;
    double null_dropout = 0.1;
    double base_sigma = 1.0;
    NetShape velocity_net;
    NetShape prototype_net{{32}, Activation::tanh};
    /// Feed a one-hot class code to v_theta alongside (x, t).
    bool label_conditioned = false;

    void validate() const;
};

struct TrainResult {
    VelocityModel model;
    std::vector<double> loss_history;
};

struct PrototypeResult {
    PrototypeModel model;
    std::vector<double> loss_history;
};

/// Unconditional AuxPath training: regress v_theta(X_t, t) on
/// a'(t) x1 + b'(t) x0 + c'(t) eta with eta drawn from cfg.aux. Starts from
/// `init` when given, otherwise from a fresh Glorot initialization.
TrainResult train_auxpath(const TrainConfig& cfg, const VelocityModel* init = nullptr);

/// Stage 1 of the conditional procedure: fit F_phi(y) to the data points of
/// class y, replacing y by the null label with probability cfg.null_dropout.
PrototypeResult train_prototype(const TrainConfig& cfg);

/// Stage 2: eta = F_phi(y) enters X_t through c(t), while the regression target
/// is a'(t) x1 + b'(t) x0 only.
TrainResult train_conditional(const TrainConfig& cfg, const PrototypeModel& prototype);

/// Continues from `pretrained` under the stage-2 objective.
TrainResult finetune_to_conditional(const VelocityModel& pretrained, const TrainConfig& cfg,
                                    const PrototypeModel& prototype);

struct TrainOutputs {
    VelocityModel velocity;
    std::vector<double> velocity_loss;
    std::optional<PrototypeModel> prototype;
    std::vector<double> prototype_loss;
};

/// Dispatches on cfg.mode. In the conditional modes the returned prototype
/// already carries the aux.scale() factor. `pretrained` is required for TrainMode::finetune.
TrainOutputs run_training(const TrainConfig& cfg, const VelocityModel* pretrained = nullptr);

}  // namespace auxfm
