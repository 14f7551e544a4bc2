// auxfm command-line front end: train, sample, eval, oracle-check, dataset.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "auxfm/error.hpp"
#include "auxfm/io.hpp"
#include "auxfm/metrics.hpp"
#include "auxfm/sample.hpp"
#include "auxfm/svg.hpp"
#include "auxfm/train.hpp"

namespace fs = std::filesystem;
using namespace auxfm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

RunConfig read_config(const Globals& g, bool required) {
    if (g.config.empty()) {
        if (required) throw UsageError("this subcommand needs --config <file>");
        return parse_config("", "<defaults>");
    }
    if (!fs::exists(g.config)) throw UsageError("config file not found: " + g.config);
    RunConfig cfg = load_config(g.config);
    if (!cfg.defaulted.empty()) {
        std::cerr << "note: " << cfg.defaulted.size() << " config keys defaulted:";
        for (const auto& k : cfg.defaulted) std::cerr << ' ' << k;
        std::cerr << '\n';
    }
    return cfg;
}

void apply_seed(const Globals& g, RunConfig& cfg) {
    if (g.seed) {
        cfg.train.seed = *g.seed;
        cfg.sample.seed = *g.seed;
    }
}

fs::path out_path(const Globals& g, const std::string& name) { return fs::path(g.out_dir) / name; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string pretrained;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
    RunConfig cfg = read_config(g, true);
    apply_seed(g, cfg);
    cfg.build_dataset();
    std::optional<VelocityModel> pretrained;
    if (cfg.train.mode == TrainMode::finetune) {
        if (a.pretrained.empty()) throw UsageError("train.mode = finetune needs --pretrained <velocity.ckpt>");
        pretrained = load_velocity(a.pretrained, cfg.train.dataset.dim());
    }
    const TrainOutputs out = run_training(cfg.train, pretrained ? &*pretrained : nullptr);
    fs::create_directories(g.out_dir);
    write_loss_csv(out_path(g, "loss.csv"), out.velocity_loss);
    save_checkpoint(out.velocity, out_path(g, "velocity.ckpt"));
    if (out.prototype) {
        save_checkpoint(*out.prototype, out_path(g, "prototype.ckpt"));
        write_loss_csv(out_path(g, "prototype_loss.csv"), out.prototype_loss);
    }
    std::cout << "trained " << to_string(cfg.train.mode) << " for " << out.velocity_loss.size() << " steps";
    if (!out.velocity_loss.empty()) std::cout << ", final loss " << fmt(out.velocity_loss.back());
    std::cout << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
    std::string velocity;
    std::string prototype;
    std::string label;  // integer or "all"
    std::optional<double> cfg_scale;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> batch;
    std::string trajectory;
    std::string svg;
    std::size_t dim = 2;
};

std::vector<int> make_labels(const std::string& spec, std::size_t batch, std::size_t classes) {
    if (spec == "all") {
        if (classes == 0) throw UsageError("--label all needs a label-aware model");
        std::vector<int> labels(batch);
        for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % classes);
        return labels;
    }
    int y = 0;
    try {
        std::size_t used = 0;
        y = std::stoi(spec, &used);
        if (used != spec.size()) throw std::invalid_argument(spec);
    } catch (const std::exception&) {
        throw UsageError("--label expects a class index or 'all', got '" + spec + "'");
    }
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
        throw UsageError("--label " + spec + " is outside [0, " + std::to_string(classes) + ")");
    }
    return repeat_label(y, batch);
}

int cmd_sample(const Globals& g, const SampleArgs& a) {
    RunConfig cfg = read_config(g, false);
    apply_seed(g, cfg);
    SampleConfig sc = cfg.sample;
    if (a.steps) sc.steps = *a.steps;
    if (a.batch) sc.batch = *a.batch;
    if (a.cfg_scale) sc.guidance = *a.cfg_scale;
    sc.record_trajectory = sc.record_trajectory || !a.trajectory.empty() || !a.svg.empty();

    const VelocityModel model = load_velocity(a.velocity, a.dim);
    std::optional<PrototypeModel> proto;
    if (!a.prototype.empty()) proto = load_prototype(a.prototype);
    if (a.cfg_scale && !proto) throw UsageError("--cfg-scale needs --prototype <prototype.ckpt>");
    if (proto && a.label.empty()) throw UsageError("--prototype needs --label");
    if (model.label_conditioned() && a.label.empty()) throw UsageError("label-conditioned model needs --label");

    std::vector<int> labels;
    if (!a.label.empty()) {
        const std::size_t classes = proto ? proto->num_classes() : model.num_classes();
        labels = make_labels(a.label, sc.batch, classes);
    }

    SampleResult result;
    if (proto && a.cfg_scale) {
        result = cfg_sample(model, *proto, labels, sc);
    } else if (proto) {
        result = conditional_sample(model, *proto, labels, sc);
    } else {
        result = euler_sample(model, sc, model.label_conditioned() ? std::span<const int>(labels) : std::span<const int>());
    }

    fs::create_directories(g.out_dir);
    write_samples_csv(out_path(g, "samples.csv"), result.samples, labels);
    if (!a.trajectory.empty()) export_trajectory(*result.trajectory, a.trajectory);
    if (!a.svg.empty()) write_text_file(a.svg, trajectories_svg(*result.trajectory, labels));
    std::cout << "sampled " << result.samples.rows() << " points with " << result.velocity_evaluations
              << " velocity evaluations\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string samples;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
    RunConfig cfg = read_config(g, false);
    const LabeledSamples s = read_samples_csv(a.samples);
    if (s.points.rows() == 0) throw DomainError(a.samples + " holds no samples");
    const LabeledDataset ds = cfg.dataset.build();
    std::vector<MetricRow> rows;
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
        if (s.labels[i] != kNullLabel) labeled.push_back(i);
    }
    if (!labeled.empty()) {
        Tensor pts(labeled.size(), s.points.cols());
        std::vector<int> labels;
        for (std::size_t k = 0; k < labeled.size(); ++k) {
            for (std::size_t c = 0; c < pts.cols(); ++c) pts(k, c) = s.points(labeled[k], c);
            labels.push_back(s.labels[labeled[k]]);
        }
        rows.push_back({"mode_accuracy", 100.0 * mode_accuracy(pts, labels, ds.mode_centers)});
    }
    rows.push_back({"distance_error", distance_error(s.points, ds.mode_centers)});
    rows.push_back({"num_samples", static_cast<double>(s.points.rows())});
    fs::create_directories(g.out_dir);
    write_metrics_csv(out_path(g, "metrics.csv"), rows);
    for (const auto& r : rows) std::cout << r.name << " = " << fmt(r.value) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
    std::size_t particles = 10000;
    std::size_t steps = 200;
    std::vector<double> t_eval{0.25, 0.5, 0.9};
    std::size_t permutations = 500;
    std::size_t loss_samples = 100000;
    std::size_t models = 5;
    bool negative_control = false;
};

int cmd_oracle_check(const Globals& g, const OracleArgs& a) {
    const std::uint64_t seed = g.seed.value_or(0);
    const OracleInstance inst = OracleInstance::finite_support_default();
    std::vector<CheckRow> rows;

    ContinuityOptions opts;
    opts.permutations = a.permutations;
    if (a.negative_control) opts.field.adot_scale = 2.0;
    for (double t : a.t_eval) {
        const ContinuityReport rep = continuity_check(inst, a.particles, a.steps, t, seed, opts);
        rows.push_back({"continuity_t" + fmt(t), rep.discrepancy, rep.threshold, rep.passed});
    }

    if (a.loss_samples > 0 && a.models > 0) {
        std::vector<VelocityModel> models;
        const RngStream root(seed);
        for (std::size_t k = 0; k < a.models; ++k) {
            RngStream init = root.split("oracle-model").split(k);
            models.push_back(VelocityModel::create(inst.dim(), NetShape{}, init));
        }
        const LossEquivalenceStudy study = loss_equivalence_study(inst, models, a.loss_samples, seed);
        for (std::size_t k = 0; k < study.reports.size(); ++k) {
            const double rel = study.reports[k].grad_relative_l2();
            rows.push_back({"grad_rel_l2_model" + std::to_string(k), rel, 0.05, rel < 0.05});
        }
        for (std::size_t k = 0; k < study.gap_difference_z.size(); ++k) {
            const double z = study.gap_difference_z[k];
            rows.push_back({"gap_shift_abs_z_model" + std::to_string(k + 1), std::abs(z), 3.0, std::abs(z) < 3.0});
        }
    }

    fs::create_directories(g.out_dir);
    write_check_csv(out_path(g, "oracle_report.csv"), rows);
    bool all = true;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << " value=" << fmt(r.value)
                  << " threshold=" << fmt(r.threshold) << '\n';
        all = all && r.pass;
    }
    return all ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

int cmd_dataset(const Globals& g) {
    RunConfig cfg = read_config(g, false);
    if (g.seed) cfg.dataset.seed = *g.seed;
    const LabeledDataset ds = cfg.dataset.build();
    fs::create_directories(g.out_dir);
    write_dataset_csv(out_path(g, "dataset.csv"), ds);
    write_text_file(out_path(g, "dataset.svg"), scatter_svg(ds.points, ds.labels, &ds.mode_centers));
    std::cout << "wrote " << ds.size() << " points in " << ds.num_classes() << " classes\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flow matching with auxiliary paths: training, sampling and oracle checks"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "Run configuration (key = value lines)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed overriding train.seed / sample.seed");
    app.add_option("--out-dir", g.out_dir, "Directory for output artifacts")->capture_default_str();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a velocity model (and prototype for conditional modes)");
    train->add_option("--pretrained", train_args.pretrained, "Velocity checkpoint to fine-tune (train.mode = finetune)");

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "Integrate the sampling ODE from a checkpoint");
    sample->add_option("--velocity", sample_args.velocity, "Velocity checkpoint")->required();
    sample->add_option("--prototype", sample_args.prototype, "Prototype checkpoint (enables the auxiliary drift)");
    sample->add_option("--label", sample_args.label, "Class index, or 'all' to cycle through classes");
    sample->add_option("--cfg-scale", sample_args.cfg_scale, "Trajectory-level guidance scale w");
    sample->add_option("--steps", sample_args.steps, "Euler steps")->check(CLI::PositiveNumber);
    sample->add_option("--batch", sample_args.batch, "Number of samples");
    sample->add_option("--trajectory", sample_args.trajectory, "Write the trajectory CSV here");
    sample->add_option("--svg", sample_args.svg, "Write a trajectory plot here");
    sample->add_option("--dim", sample_args.dim, "Data dimension")->capture_default_str();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Mode accuracy and distance error of a samples CSV");
    eval->add_option("--samples", eval_args.samples, "samples.csv from the sample subcommand")->required();

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle-check", "Marginal-consistency and loss-equivalence checks");
    oracle->add_option("--particles", oracle_args.particles)->capture_default_str();
    oracle->add_option("--steps", oracle_args.steps)->capture_default_str()->check(CLI::PositiveNumber);
    oracle->add_option("--t-eval", oracle_args.t_eval)->capture_default_str();
    oracle->add_option("--permutations", oracle_args.permutations)->capture_default_str();
    oracle->add_option("--loss-samples", oracle_args.loss_samples, "0 skips the loss-equivalence check")
        ->capture_default_str();
    oracle->add_option("--models", oracle_args.models)->capture_default_str();
    oracle->add_flag("--negative-control", oracle_args.negative_control, "Use the field with a'(t) doubled");

    auto* dataset = app.add_subcommand("dataset", "Write the configured dataset as CSV and SVG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (*seed_opt) g.seed = seed;

    try {
        if (*train) return cmd_train(g, train_args);
        if (*sample) return cmd_sample(g, sample_args);
        if (*eval) return cmd_eval(g, eval_args);
        if (*oracle) return cmd_oracle_check(g, oracle_args);
        if (*dataset) return cmd_dataset(g);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
