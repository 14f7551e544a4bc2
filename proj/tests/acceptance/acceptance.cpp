// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Run everything, or a single criterion with --only N.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "auxfm/auxiliary.hpp"
#include "auxfm/datasets.hpp"
#include "auxfm/gradcheck.hpp"
#include "auxfm/io.hpp"
#include "auxfm/metrics.hpp"
#include "auxfm/paths.hpp"
#include "auxfm/sample.hpp"
#include "auxfm/train.hpp"

using namespace auxfm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

// Collects sub-checks; the criterion passes only if every one does.
struct Verdict {
    bool ok = true;
    std::vector<std::string> lines;

    void check(bool pass, const std::string& what) {
        ok = ok && pass;
        lines.push_back(std::string(pass ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { lines.push_back("info " + what); }
};

std::vector<int> cycling_labels(std::size_t n, int k) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
    return labels;
}

// ---------------------------------------------------------------------------

void criterion1(Verdict& v) {
    const OracleInstance inst = OracleInstance::finite_support_default();
    for (double t : {0.25, 0.5, 0.9}) {
        const ContinuityReport good = continuity_check(inst, 10000, 200, t, 1);
        v.check(good.passed, "exact field t=" + fmt(t) + " energy=" + fmt(good.discrepancy) +
                                 " q99=" + fmt(good.threshold) + " p=" + fmt(good.p_value));
        ContinuityOptions bad;
        bad.field.adot_scale = 2.0;
        const ContinuityReport neg = continuity_check(inst, 10000, 200, t, 1, bad);
        v.check(!neg.passed, "a' doubled rejected t=" + fmt(t) + " energy=" + fmt(neg.discrepancy) +
                                 " q99=" + fmt(neg.threshold));
    }
}

void criterion2(Verdict& v) {
    const OracleInstance inst = OracleInstance::finite_support_default();
    std::vector<VelocityModel> models;
    const RngStream root(2);
    for (std::uint64_t k = 0; k < 5; ++k) {
        RngStream init = root.split("model").split(k);
        models.push_back(VelocityModel::create(inst.dim(), NetShape{}, init));
    }
    const LossEquivalenceStudy study = loss_equivalence_study(inst, models, 1'000'000, 2);
    for (std::size_t k = 0; k < study.reports.size(); ++k) {
        const auto& r = study.reports[k];
        const double rel = r.grad_relative_l2();
        v.check(rel < 0.05, "model " + std::to_string(k) + " grad rel L2=" + fmt(rel) + " gap=" + fmt(r.gap, 6) +
                                " +- " + fmt(r.gap_stderr, 2));
    }
    for (std::size_t k = 0; k < study.gap_difference_z.size(); ++k) {
        const double z = study.gap_difference_z[k];
        v.check(std::abs(z) < 3.0, "gap(model " + std::to_string(k + 1) + ") - gap(model 0) |z|=" + fmt(std::abs(z)));
    }
}

void criterion3(Verdict& v) {
    const std::vector<double> x1{0.0, 0.0};
    TrainConfig cfg;
    cfg.dataset = make_point(x1);
    cfg.aux = AuxSpec::gaussian();
    cfg.steps = 20000;
    cfg.seed = 3;
    const TrainResult r = train_auxpath(cfg);

    Tensor grid(21 * 21, 2);
    for (std::size_t i = 0; i < 21; ++i) {
        for (std::size_t j = 0; j < 21; ++j) {
            grid(i * 21 + j, 0) = -2.0 + 0.2 * static_cast<double>(i);
            grid(i * 21 + j, 1) = -2.0 + 0.2 * static_cast<double>(j);
        }
    }
    for (double t : {0.1, 0.5, 0.9}) {
        const Tensor pred = velocity(r.model, grid, t);
        const Tensor truth = analytic_gaussian_field(grid, t, x1, cfg.base_sigma, cfg.schedule);
        const PathCoeffs k = cfg.schedule.coeffs(t);
        const double var = k.b * k.b * cfg.base_sigma * cfg.base_sigma + k.c * k.c;
        double mean = 0.0, weighted = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < grid.rows(); ++i) {
            const double e = std::hypot(pred(i, 0) - truth(i, 0), pred(i, 1) - truth(i, 1));
            mean += e;
            const double w = std::exp(-0.5 * (grid(i, 0) * grid(i, 0) + grid(i, 1) * grid(i, 1)) / var);
            weighted += w * e;
            wsum += w;
        }
        mean /= static_cast<double>(grid.rows());
        v.check(mean < 0.05, "t=" + fmt(t) + " mean L2 error on grid=" + fmt(mean));
        v.info("t=" + fmt(t) + " p_t-weighted error=" + fmt(weighted / wsum) + " (marginal std " +
               fmt(std::sqrt(var)) + ")");
    }
}

void criterion4(Verdict& v) {
    struct Variant {
        std::string name;
        AuxSpec aux;
        bool guided;
    };
    const std::vector<Variant> variants{{"cfm", AuxSpec::zero(), false},
                                        {"gaussian", AuxSpec::gaussian(), false},
                                        {"uniform", AuxSpec::uniform(), false},
                                        {"laplace", AuxSpec::laplace(), false},
                                        {"rademacher", AuxSpec::rademacher(), false},
                                        {"label-guided", AuxSpec::zero(), true}};
    std::vector<double> acc(variants.size(), 0.0), err(variants.size(), 0.0);
    const int seeds = 3;
    for (int seed = 0; seed < seeds; ++seed) {
        RngStream data(100 + static_cast<std::uint64_t>(seed));
        const LabeledDataset ds = make_ring(64, 200, 0.02, data);
        SampleConfig sc;
        sc.batch = 2000;
        sc.seed = 1000 + static_cast<std::uint64_t>(seed);
        const std::vector<int> labels = cycling_labels(sc.batch, 64);
        for (std::size_t k = 0; k < variants.size(); ++k) {
            TrainConfig cfg;
            cfg.dataset = ds;
            cfg.seed = static_cast<std::uint64_t>(seed);
            cfg.label_conditioned = true;
            cfg.aux = variants[k].aux;
            Tensor samples;
            if (variants[k].guided) {
                cfg.mode = TrainMode::conditional_two_stage;
                const TrainOutputs out = run_training(cfg);
                samples = conditional_sample(out.velocity, *out.prototype, labels, sc).samples;
            } else {
                samples = euler_sample(train_auxpath(cfg).model, sc, labels).samples;
            }
            const double a = mode_accuracy(samples, labels, ds.mode_centers);
            const double e = distance_error(samples, ds.mode_centers);
            acc[k] += a / seeds;
            err[k] += e / seeds;
            v.info("seed " + std::to_string(seed) + " " + variants[k].name + " acc=" + fmt(a) + " err=" + fmt(e));
        }
    }
    const std::size_t gauss = 1, guided = variants.size() - 1;
    for (std::size_t k = 0; k < variants.size(); ++k) {
        v.check(acc[k] > 4.0 / 64.0,
                variants[k].name + " mean acc=" + fmt(acc[k]) + " > 4/64, mean err=" + fmt(err[k]));
    }
    v.check(acc[guided] > acc[gauss], "label-guided acc " + fmt(acc[guided]) + " > gaussian " + fmt(acc[gauss]));
    v.check(err[guided] < err[gauss], "label-guided err " + fmt(err[guided]) + " < gaussian " + fmt(err[gauss]));
}

void criterion5(Verdict& v) {
    RngStream data(5);
    TrainConfig cfg;
    cfg.dataset = make_bimodal_ring(2.0, 0.1, 2000, data);
    cfg.mode = TrainMode::conditional_two_stage;
    const TrainOutputs out = run_training(cfg);
    const std::vector<int> labels = repeat_label(0, 2000);

    std::vector<double> occ;
    for (double w : {0.0, 1.0, 3.0, 7.0}) {
        SampleConfig sc;
        sc.batch = 2000;
        sc.seed = 9;
        sc.guidance = w;
        const SampleResult s = cfg_sample(out.velocity, *out.prototype, labels, sc);
        occ.push_back(mode_accuracy(s.samples, labels, cfg.dataset.mode_centers));
        v.info("w=" + fmt(w) + " occupancy=" + fmt(100.0 * occ.back()) + "%");
        if (w == 1.0) {
            const SampleResult plain = conditional_sample(out.velocity, *out.prototype, labels, sc);
            v.check(plain.samples == s.samples, "guided sampling at w=1 bit-identical to conditional sampling");
        }
    }
    v.check(occ[3] - occ[1] >= 0.10, "occupancy gain w=7 over w=1: " + fmt(100.0 * (occ[3] - occ[1])) + " points");
    for (std::size_t i = 0; i + 1 < occ.size(); ++i) {
        v.check(occ[i + 1] >= occ[i] - 0.02, "non-decreasing within 2% at pair " + std::to_string(i));
    }
}

void criterion6(Verdict& v) {
    RngStream rng(6);
    const VelocityModel model = VelocityModel::create(2, NetShape{{16}, Activation::tanh}, rng);
    const PrototypeModel proto = PrototypeModel::create(2, 2, rng);
    const std::vector<int> labels = repeat_label(0, 50);
    for (std::size_t steps : {1, 10, 100}) {
        for (double w : {0.0, 1.0, 7.0}) {
            SampleConfig sc;
            sc.steps = steps;
            sc.batch = labels.size();
            sc.guidance = w;
            const auto v0 = model.net().forward_calls(), p0 = proto.net().forward_calls();
            const SampleResult s = cfg_sample(model, proto, labels, sc);
            const auto dv = model.net().forward_calls() - v0, dp = proto.net().forward_calls() - p0;
            v.check(dv == steps && s.velocity_evaluations == steps,
                    "N=" + std::to_string(steps) + " w=" + fmt(w) + " velocity passes=" + std::to_string(dv) +
                        " prototype passes=" + std::to_string(dp));
            v.check(dp == 2, "N=" + std::to_string(steps) + " w=" + fmt(w) + " prototype passes independent of N");
        }
    }
}

void criterion7(Verdict& v) {
    RngStream data(7);
    TrainConfig pre;
    pre.dataset = make_ring(8, 200, 0.02, data);
    pre.aux = AuxSpec::zero();
    const TrainResult base = train_auxpath(pre);

    SampleConfig sc;
    sc.batch = 2000;
    sc.seed = 3;
    const std::vector<int> labels = cycling_labels(sc.batch, 8);
    for (double scale : {8.0, 1.0}) {
        TrainConfig ft = pre;
        ft.mode = TrainMode::finetune;
        ft.steps = 5000;
        ft.aux = AuxSpec::zero().with_scale(scale);
        const TrainOutputs out = run_training(ft, &base.model);
        const Tensor s = conditional_sample(out.velocity, *out.prototype, labels, sc).samples;
        const double acc = mode_accuracy(s, labels, pre.dataset.mode_centers);
        const std::string line = "prototype scale " + fmt(scale) + " acc=" + fmt(100.0 * acc) +
                                 "% err=" + fmt(distance_error(s, pre.dataset.mode_centers));
        if (scale == 8.0) {
            v.check(acc >= 0.375, line + " (>= 37.5%)");
        } else {
            v.info(line);
        }
    }
}

double mean_of(const Tensor& t) {
    double s = 0.0;
    for (double x : t.flat()) s += x;
    return s / static_cast<double>(t.size());
}

double var_of(const Tensor& t, double mu) {
    double s = 0.0;
    for (double x : t.flat()) s += (x - mu) * (x - mu);
    return s / static_cast<double>(t.size());
}

void criterion8(Verdict& v) {
    // gradients on the default velocity architecture
    {
        RngStream rng(8);
        const VelocityModel model = VelocityModel::create(2, NetShape{}, rng);
        Tensor x(32, 3), y(32, 2);
        for (double& e : x.flat()) e = rng.normal();
        for (double& e : y.flat()) e = rng.normal();
        const LossFn loss = [&](const Mlp& net, MlpGrads* grads) {
            MlpCache cache;
            const Tensor up = net.forward(x, cache) - y;
            double l = 0.0;
            for (double e : up.flat()) l += 0.5 * e * e;
            if (grads != nullptr) net.backward(cache, up, *grads);
            return l;
        };
        const GradCheckReport rep = finite_diff_check(model.net(), loss, 1e-4);
        v.check(rep.max_rel_error < 1e-4, "finite differences, max rel error=" + fmt(rep.max_rel_error, 3));
    }

    // path boundaries and derivatives
    for (const PathSchedule& s : {PathSchedule::linear_bump(), PathSchedule::linear_zero(), PathSchedule::trig_bump()}) {
        const PathCoeffs c0 = s.coeffs(0.0), c1 = s.coeffs(1.0);
        const bool ends = std::abs(c0.a) <= 1e-12 && std::abs(c0.b - 1.0) <= 1e-12 && std::abs(c0.c) <= 1e-12 &&
                          std::abs(c1.a - 1.0) <= 1e-12 && std::abs(c1.b) <= 1e-12 && std::abs(c1.c) <= 1e-12;
        double worst = 0.0;
        const double h = 1e-6;
        for (int i = 1; i < 100; ++i) {
            const double t = i / 100.0;
            const PathCoeffs lo = s.coeffs(t - h), hi = s.coeffs(t + h), mid = s.coeffs(t);
            worst = std::max({worst, std::abs((hi.a - lo.a) / (2 * h) - mid.a_dot),
                              std::abs((hi.b - lo.b) / (2 * h) - mid.b_dot),
                              std::abs((hi.c - lo.c) / (2 * h) - mid.c_dot)});
        }
        v.check(ends && worst < 1e-6, s.name() + " boundaries exact, derivative error=" + fmt(worst, 2));
    }

    // distributions at 5 sigma
    {
        const std::size_t n = 100000;
        RngStream root(88);
        struct Law {
            std::string name;
            AuxSpec spec;
            double mean, var, fourth;  // fourth central moment, for the variance SE
        };
        const std::vector<Law> laws{{"gaussian", AuxSpec::gaussian(), 0.0, 1.0, 3.0},
                                    {"uniform", AuxSpec::uniform(), 0.0, 1.0 / 3.0, 1.0 / 5.0},
                                    {"laplace", AuxSpec::laplace(), 0.0, 2.0, 24.0},
                                    {"rademacher", AuxSpec::rademacher(), 0.0, 1.0, 1.0}};
        for (const Law& law : laws) {
            RngStream rng = root.split(law.name);
            const Tensor eta = sample_eta(law.spec, rng, 1, n);
            const double mu = mean_of(eta), var = var_of(eta, law.mean);
            const double se_mu = std::sqrt(law.var / n), se_var = std::sqrt((law.fourth - law.var * law.var) / n);
            v.check(std::abs(mu - law.mean) <= 5 * se_mu && std::abs(var - law.var) <= 5 * se_var,
                    law.name + " mean=" + fmt(mu, 3) + " var=" + fmt(var) + " (expected " + fmt(law.var) + ")");
        }
        RngStream rng = root.split("base");
        const Tensor x0 = sample_base(rng, 2, n / 2);
        const double mu = mean_of(x0), var = var_of(x0, 0.0);
        v.check(std::abs(mu) <= 5 * std::sqrt(1.0 / n) && std::abs(var - 1.0) <= 5 * std::sqrt(2.0 / n),
                "base N(0, I) mean=" + fmt(mu, 3) + " var=" + fmt(var));
    }

    // checkpoint round-trip
    {
        RngStream rng(89);
        const VelocityModel model = VelocityModel::create(2, NetShape{}, rng, 8);
        const fs::path dir = fs::temp_directory_path() / "auxfm_acceptance";
        fs::create_directories(dir);
        save_checkpoint(model, dir / "a.ckpt");
        const VelocityModel back = load_velocity(dir / "a.ckpt");
        save_checkpoint(back, dir / "b.ckpt");
        const bool params = back.net().params().flatten() == model.net().params().flatten();
        const bool bytes = read_binary_file(dir / "a.ckpt") == read_binary_file(dir / "b.ckpt");
        v.check(params && bytes, "checkpoint save/load/save is bit-exact");
        fs::remove_all(dir);
    }
}

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "marginal consistency of the exact field", 120, criterion1},
        {2, "loss gradient equivalence", 300, criterion2},
        {3, "Gaussian oracle regression", 300, criterion3},
        {4, "ring-64 comparison over 3 seeds", 1800, criterion4},
        {5, "bimodal guidance occupancy", 600, criterion5},
        {6, "one velocity pass per guided step", 60, criterion6},
        {7, "ring-8 fine-tuning to conditional", 600, criterion7},
        {8, "gradients, paths, distributions, checkpoints", 300, criterion8},
    };

    bool all_ok = true;
    for (const Criterion& c : all) {
        if (only != 0 && c.id != only) continue;
        Verdict v;
        const auto t0 = Clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = seconds_since(t0);
        v.check(secs < c.budget_seconds, "runtime " + fmt(secs, 3) + " s (budget " + fmt(c.budget_seconds) + " s)");
        std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << '\n';
        for (const auto& l : v.lines) std::cout << "    " << l << '\n';
        std::cout.flush();
        all_ok = all_ok && v.ok;
    }
    return all_ok ? 0 : 1;
}
