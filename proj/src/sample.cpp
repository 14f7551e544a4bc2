#include "auxfm/sample.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "auxfm/datasets.hpp"
#include "auxfm/error.hpp"

namespace auxfm {

namespace {

// v_theta(x, t) + c'(t) eta, one eta row per sample.
SampleResult drifted_sample(const VelocityModel& model, const Tensor& eta, std::span<const int> labels,
                            const SampleConfig& cfg) {
    cfg.validate();
    if (eta.cols() != model.dim() || eta.rows() != cfg.batch) {
        throw ShapeError("auxiliary drift has shape " + eta.shape_string() + ", expected (" +
                         std::to_string(cfg.batch) + ", " + std::to_string(model.dim()) + ")");
    }
    const std::span<const int> net_labels = model.label_conditioned() ? labels : std::span<const int>();
    std::size_t calls = 0;
    const VectorField field = [&](const Tensor& x, double t) {
        ++calls;
        Tensor v = velocity(model, x, t, net_labels);
        v.axpy(cfg.schedule.coeffs(t).c_dot, eta);
        return v;
    };
    SampleResult result = integrate_euler(field, initial_noise(cfg, model.dim()), cfg.steps, cfg.record_trajectory);
    result.velocity_evaluations = calls;
    return result;
}

void check_labels(std::span<const int> labels, std::size_t batch) {
    if (labels.size() != batch) {
        throw ShapeError("expected one label per sample (" + std::to_string(batch) + "), got " +
                         std::to_string(labels.size()));
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void SampleConfig::validate() const {
    if (steps < 1) throw DomainError("sampling needs at least one Euler step");
    if (!std::isfinite(guidance)) throw DomainError("guidance scale must be finite");
    if (!(base_sigma > 0.0)) throw DomainError("base sigma must be positive");
}

SampleResult integrate_euler(const VectorField& field, Tensor x, std::size_t steps, bool record, double t_end) {
    if (steps < 1) throw DomainError("Euler integration needs at least one step");
    if (!(t_end > 0.0 && t_end <= 1.0)) throw DomainError("Euler end time must lie in (0, 1]");
    SampleResult result;
    const double dt = t_end / static_cast<double>(steps);
    if (record) {
        result.trajectory.emplace();
        result.trajectory->times.push_back(0.0);
        result.trajectory->states.push_back(x);
    }
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t_end * static_cast<double>(k) / static_cast<double>(steps);
        const Tensor v = field(x, t);
        require_same_shape(x, v, "Euler step");
        x.axpy(dt, v);
        if (!x.all_finite()) throw NumericError("non-finite sample state after Euler step " + std::to_string(k));
        if (record) {
            result.trajectory->times.push_back(t_end * static_cast<double>(k + 1) / static_cast<double>(steps));
            result.trajectory->states.push_back(x);
        }
    }
    result.samples = std::move(x);
    return result;
}

Tensor initial_noise(const SampleConfig& cfg, std::size_t dim) {
    RngStream rng = RngStream(cfg.seed).split("noise");
    return sample_base(rng, dim, cfg.batch, cfg.base_sigma);
}

SampleResult euler_sample(const VelocityModel& model, const SampleConfig& cfg, std::span<const int> labels) {
    cfg.validate();
    if (model.label_conditioned()) check_labels(labels, cfg.batch);
    std::size_t calls = 0;
    const VectorField field = [&](const Tensor& x, double t) {
        ++calls;
        return velocity(model, x, t, labels);
    };
    SampleResult result = integrate_euler(field, initial_noise(cfg, model.dim()), cfg.steps, cfg.record_trajectory);
    result.velocity_evaluations = calls;
    return result;
}

SampleResult conditional_sample(const VelocityModel& model, const PrototypeModel& proto,
                                std::span<const int> labels, const SampleConfig& cfg) {
    check_labels(labels, cfg.batch);
    const Tensor eta = prototypes(proto, labels);
    SampleResult result = drifted_sample(model, eta, labels, cfg);
    result.prototype_evaluations = 1;
    return result;
}

SampleResult cfg_sample(const VelocityModel& model, const PrototypeModel& proto, std::span<const int> labels,
                        const SampleConfig& cfg) {
    check_labels(labels, cfg.batch);
    const Tensor eta_c = prototypes(proto, labels);
    const Tensor null_row = prototype(proto, kNullLabel);
    Tensor eta_u(eta_c.rows(), eta_c.cols());
    for (std::size_t r = 0; r < eta_u.rows(); ++r) {
        for (std::size_t c = 0; c < eta_u.cols(); ++c) eta_u(r, c) = null_row(0, c);
    }
    SampleResult result = drifted_sample(model, guided_eta(eta_c, eta_u, cfg.guidance), labels, cfg);
    result.prototype_evaluations = 2;
    return result;
}

Tensor guided_eta(const Tensor& eta_conditional, const Tensor& eta_null, double w) {
    require_same_shape(eta_conditional, eta_null, "guided_eta");
    Tensor out(eta_conditional.rows(), eta_conditional.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.flat()[i] = (1.0 - w) * eta_null.flat()[i] + w * eta_conditional.flat()[i];
    }
    return out;
}

std::vector<int> repeat_label(int label, std::size_t batch) { return std::vector<int>(batch, label); }

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
    if (traj.times.size() != traj.states.size()) throw ShapeError("trajectory times/states length mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t d = traj.states.empty() ? 0 : traj.states.front().cols();
    out << "sample_id,step,t";
    for (std::size_t c = 0; c < d; ++c) out << ",x_" << c;
    out << '\n';
    const std::size_t batch = traj.states.empty() ? 0 : traj.states.front().rows();
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t s = 0; s < traj.states.size(); ++s) {
            out << i << ',' << s << ',' << format_double(traj.times[s]);
            for (std::size_t c = 0; c < d; ++c) out << ',' << format_double(traj.states[s](i, c));
            out << '\n';
        }
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
    std::size_t d = 0;
    {
        std::stringstream header(line);
        std::string field;
        std::size_t n = 0;
        while (std::getline(header, field, ',')) ++n;
        if (n < 3) throw IoError(path.string() + ": malformed trajectory header");
        d = n - 3;
    }
    // sample_id -> step -> row
    std::map<std::size_t, std::map<std::size_t, std::vector<double>>> rows;
    std::map<std::size_t, double> times;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != d + 3) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(d + 3) +
                          " fields");
        }
        const std::size_t id = std::stoull(fields[0]);
        const std::size_t step = std::stoull(fields[1]);
        times[step] = std::stod(fields[2]);
        std::vector<double> x(d);
        for (std::size_t c = 0; c < d; ++c) x[c] = std::stod(fields[3 + c]);
        rows[id][step] = std::move(x);
    }
    Trajectory traj;
    for (const auto& [step, t] : times) {
        traj.times.push_back(t);
        Tensor state(rows.size(), d);
        std::size_t r = 0;
        for (const auto& [id, by_step] : rows) {
            const auto it = by_step.find(step);
            if (it == by_step.end()) throw IoError(path.string() + ": sample " + std::to_string(id) + " misses a step");
            for (std::size_t c = 0; c < d; ++c) state(r, c) = it->second[c];
            ++r;
        }
        traj.states.push_back(std::move(state));
    }
    return traj;
}

}  // namespace auxfm
