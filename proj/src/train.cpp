#include "auxfm/train.hpp"

#include <cmath>
#include <functional>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

struct Batch {
    Tensor x1;
    std::vector<int> labels;
};

Batch draw_batch(const LabeledDataset& ds, std::size_t batch, RngStream& rng) {
    Batch b{Tensor(batch, ds.dim()), std::vector<int>(batch)};
    for (std::size_t r = 0; r < batch; ++r) {
        const std::size_t i = rng.below(ds.size());
        for (std::size_t c = 0; c < ds.dim(); ++c) b.x1(r, c) = ds.points(i, c);
        b.labels[r] = ds.labels[i];
    }
    return b;
}

// Mean over batch and dimensions of the squared error; writes dLoss/dPred.
double mse(const Tensor& pred, const Tensor& target, Tensor& grad) {
    grad = Tensor(pred.rows(), pred.cols());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.flat()[i] - target.flat()[i];
        loss += diff * diff;
        grad.flat()[i] = 2.0 * diff * inv_n;
    }
    return loss * inv_n;
}

using EtaSource = std::function<Tensor(const Batch&, const Tensor& x0, RngStream& rng)>;

std::vector<double> velocity_loop(VelocityModel& model, const TrainConfig& cfg, const EtaSource& eta_source,
                                  bool include_eta_term) {
    const RngStream root(cfg.seed);
    RngStream data_rng = root.split("data");
    RngStream base_rng = root.split("base");
    RngStream eta_rng = root.split("eta");
    RngStream time_rng = root.split("time");

    const std::size_t d = cfg.dataset.dim();
    AdamState adam(model.net(), AdamConfig{cfg.learning_rate});
    std::vector<double> history;
    history.reserve(cfg.steps);
    std::vector<double> t(cfg.batch);
    MlpCache cache;
    Tensor grad;

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const Batch batch = draw_batch(cfg.dataset, cfg.batch, data_rng);
        const Tensor x0 = sample_base(base_rng, d, cfg.batch, cfg.base_sigma);
        const Tensor eta = eta_source(batch, x0, eta_rng);
        for (double& ti : t) ti = time_rng.uniform();

        const Tensor xt = interpolate_rows(cfg.schedule, x0, batch.x1, eta, t);
        const Tensor target = path_velocity_rows(cfg.schedule, x0, batch.x1, eta, t, include_eta_term);
        const std::span<const int> labels =
            model.label_conditioned() ? std::span<const int>(batch.labels) : std::span<const int>();
        const Tensor pred = model.net().forward(model.features(xt, t, labels), cache);

        const double loss = mse(pred, target, grad);
        if (!std::isfinite(loss)) throw NumericError("non-finite training loss at step " + std::to_string(step));
        MlpGrads grads = model.net().zero_grads();
        model.net().backward(cache, grad, grads);
        adam_step(model.net(), grads, adam);
        history.push_back(loss);
    }
    return history;
}

VelocityModel fresh_velocity(const TrainConfig& cfg) {
    RngStream init_rng = RngStream(cfg.seed).split("init");
    const std::size_t classes = cfg.label_conditioned ? cfg.dataset.num_classes() : 0;
    return VelocityModel::create(cfg.dataset.dim(), cfg.velocity_net, init_rng, classes);
}

void check_compatible(const VelocityModel& model, const TrainConfig& cfg) {
    if (model.dim() != cfg.dataset.dim()) {
        throw ShapeError("model dim " + std::to_string(model.dim()) + " does not match dataset dim " +
                         std::to_string(cfg.dataset.dim()));
    }
    const std::size_t classes = cfg.label_conditioned ? cfg.dataset.num_classes() : 0;
    if (model.num_classes() != classes) {
        throw ShapeError("model is conditioned on " + std::to_string(model.num_classes()) +
                         " classes, training config expects " + std::to_string(classes));
    }
}

}  // namespace

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::auxpath: return "auxpath";
        case TrainMode::conditional_two_stage: return "conditional_two_stage";
        case TrainMode::finetune: return "finetune";
    }
    return "auxpath";
}

TrainMode train_mode_from_string(const std::string& name) {
    if (name == "auxpath") return TrainMode::auxpath;
    if (name == "conditional_two_stage") return TrainMode::conditional_two_stage;
    if (name == "finetune") return TrainMode::finetune;
    throw DomainError("unknown train mode '" + name + "' (expected auxpath, conditional_two_stage or finetune)");
}

void TrainConfig::validate() const {
    if (batch == 0) throw DomainError("train batch must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be positive");
    if (!(null_dropout >= 0.0 && null_dropout <= 1.0)) throw DomainError("null-label dropout must lie in [0, 1]");
    if (!(base_sigma > 0.0)) throw DomainError("base sigma must be positive");
    if (dataset.size() == 0) throw DomainError("training dataset is empty");
    dataset.validate();
}

TrainResult train_auxpath(const TrainConfig& cfg, const VelocityModel* init) {
    cfg.validate();
    TrainResult result{init != nullptr ? *init : fresh_velocity(cfg), {}};
    check_compatible(result.model, cfg);
    const std::size_t d = cfg.dataset.dim();
    const EtaSource source = [&cfg, d](const Batch& b, const Tensor& x0, RngStream& rng) {
        return sample_eta(cfg.aux, rng, d, b.x1.rows(), AuxContext{&x0, b.labels});
    };
    result.loss_history = velocity_loop(result.model, cfg, source, true);
    return result;
}

PrototypeResult train_prototype(const TrainConfig& cfg) {
    cfg.validate();
    const RngStream root(cfg.seed);
    RngStream init_rng = root.split("prototype-init");
    RngStream data_rng = root.split("prototype-data");
    RngStream drop_rng = root.split("prototype-dropout");

    PrototypeResult result{
        PrototypeModel::create(cfg.dataset.num_classes(), cfg.dataset.dim(), init_rng, cfg.prototype_net), {}};
    AdamState adam(result.model.net(), AdamConfig{cfg.learning_rate});
    MlpCache cache;
    Tensor grad;
    result.loss_history.reserve(cfg.prototype_steps);
    for (std::size_t step = 0; step < cfg.prototype_steps; ++step) {
        Batch batch = draw_batch(cfg.dataset, cfg.batch, data_rng);
        for (int& y : batch.labels) {
            if (drop_rng.uniform() < cfg.null_dropout) y = kNullLabel;
        }
        const Tensor pred = result.model.net().forward(result.model.encode(batch.labels), cache);
        const double loss = mse(pred, batch.x1, grad);
        if (!std::isfinite(loss)) throw NumericError("non-finite prototype loss at step " + std::to_string(step));
        MlpGrads grads = result.model.net().zero_grads();
        result.model.net().backward(cache, grad, grads);
        adam_step(result.model.net(), grads, adam);
        result.loss_history.push_back(loss);
    }
    return result;
}

TrainResult finetune_to_conditional(const VelocityModel& pretrained, const TrainConfig& cfg,
                                    const PrototypeModel& prototype) {
    cfg.validate();
    check_compatible(pretrained, cfg);
    if (prototype.dim() != cfg.dataset.dim()) {
        throw ShapeError("prototype dim " + std::to_string(prototype.dim()) + " does not match dataset dim " +
                         std::to_string(cfg.dataset.dim()));
    }
    if (prototype.num_classes() != cfg.dataset.num_classes()) {
        throw ShapeError("prototype knows " + std::to_string(prototype.num_classes()) + " classes, dataset has " +
                         std::to_string(cfg.dataset.num_classes()));
    }
    TrainResult result{pretrained, {}};
    const EtaSource source = [&prototype](const Batch& b, const Tensor&, RngStream&) {
        return prototypes(prototype, b.labels);
    };
    result.loss_history = velocity_loop(result.model, cfg, source, false);
    return result;
}

TrainResult train_conditional(const TrainConfig& cfg, const PrototypeModel& prototype) {
    cfg.validate();
    return finetune_to_conditional(fresh_velocity(cfg), cfg, prototype);
}

TrainOutputs run_training(const TrainConfig& cfg, const VelocityModel* pretrained) {
    TrainOutputs out;
    switch (cfg.mode) {
        case TrainMode::auxpath: {
            auto r = train_auxpath(cfg);
            out.velocity = std::move(r.model);
            out.velocity_loss = std::move(r.loss_history);
            break;
        }
        case TrainMode::conditional_two_stage:
        case TrainMode::finetune: {
            if (cfg.mode == TrainMode::finetune && pretrained == nullptr) {
                throw DomainError("finetune mode needs a pretrained velocity model");
            }
            auto proto = train_prototype(cfg);
            if (cfg.aux.scale() != 1.0) proto.model = scaled_prototype(proto.model, cfg.aux.scale());
            auto r = cfg.mode == TrainMode::finetune ? finetune_to_conditional(*pretrained, cfg, proto.model)
                                                     : train_conditional(cfg, proto.model);
            out.velocity = std::move(r.model);
            out.velocity_loss = std::move(r.loss_history);
            out.prototype = std::move(proto.model);
            out.prototype_loss = std::move(proto.loss_history);
            break;
        }
    }
    return out;
}

}  // namespace auxfm
