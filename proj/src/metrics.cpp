#include "auxfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Core>

#include "auxfm/datasets.hpp"
#include "auxfm/error.hpp"
#include "auxfm/sample.hpp"

namespace auxfm {

namespace {

void check_centers(const Tensor& samples, const Tensor& centers) {
    if (samples.rows() == 0) throw DomainError("metric requested on an empty sample set");
    if (centers.rows() == 0) throw DomainError("metric requested with no mode centers");
    if (samples.cols() != centers.cols()) {
        throw ShapeError("samples have dim " + std::to_string(samples.cols()) + ", centers have dim " +
                         std::to_string(centers.cols()));
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Structure-of-arrays copy of a point cloud in single precision.
struct FloatCloud {
    std::size_t n = 0;
    std::vector<AlignedVector<float>> coords;  // one array per dimension

    FloatCloud(std::size_t count, std::size_t dim) : n(count), coords(dim, AlignedVector<float>(count)) {}
};

// Sum over all i < j of |p_i - p_j|. Rows are reduced in float, totals in double.
double within_sum(const FloatCloud& cloud, Eigen::ArrayXf& scratch) {
    const std::size_t n = cloud.n;
    scratch.resize(static_cast<Eigen::Index>(n));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto len = static_cast<Eigen::Index>(n - i - 1);
        if (cloud.coords.size() == 2) {
            const Eigen::Map<const Eigen::ArrayXf> xs(cloud.coords[0].data() + i + 1, len);
            const Eigen::Map<const Eigen::ArrayXf> ys(cloud.coords[1].data() + i + 1, len);
            total += static_cast<double>(
                ((xs - cloud.coords[0][i]).square() + (ys - cloud.coords[1][i]).square()).sqrt().sum());
            continue;
        }
        auto buf = scratch.head(len);
        buf = (Eigen::Map<const Eigen::ArrayXf>(cloud.coords[0].data() + i + 1, len) - cloud.coords[0][i]).square();
        for (std::size_t dim = 1; dim < cloud.coords.size(); ++dim) {
            buf += (Eigen::Map<const Eigen::ArrayXf>(cloud.coords[dim].data() + i + 1, len) - cloud.coords[dim][i])
                       .square();
        }
        total += static_cast<double>(buf.sqrt().sum());
    }
    return total;
}

FloatCloud gather(const std::vector<std::vector<float>>& pooled, std::span<const std::size_t> idx) {
    FloatCloud out(idx.size(), pooled.size());
    for (std::size_t dim = 0; dim < pooled.size(); ++dim) {
        for (std::size_t k = 0; k < idx.size(); ++k) out.coords[dim][k] = static_cast<float>(pooled[dim][idx[k]]);
    }
    return out;
}

double energy_from_sums(double total, double within_a, double within_b, std::size_t n, std::size_t m) {
    const double cross = total - within_a - within_b;
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return 2.0 * cross / (dn * dm) - 2.0 * within_a / (dn * dn) - 2.0 * within_b / (dm * dm);
}

// Per-component log-weight and velocity evaluation for one row.
struct MixtureScratch {
    std::vector<double> log_w;
};

void marginal_field_row(const OracleInstance& inst, std::span<const double> x, const PathCoeffs& k,
                        const FieldOptions& opts, std::span<double> out, MixtureScratch& scratch) {
    const std::size_t m = inst.x1_atoms.rows();
    const std::size_t r = inst.eta_atoms.rows();
    const std::size_t d = inst.dim();
    const double var = k.b * k.b * inst.sigma0 * inst.sigma0;
    scratch.log_w.assign(m * r, 0.0);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = x[c] - k.a * inst.x1_atoms(i, c) - k.c * inst.eta_atoms(j, c);
                sq += diff * diff;
            }
            const double lw = std::log(inst.x1_weights[i]) + std::log(inst.eta_weights[j]) - sq / (2.0 * var);
            scratch.log_w[i * r + j] = lw;
            max_log = std::max(max_log, lw);
        }
    }
    if (!std::isfinite(max_log)) {
        throw NumericError("mixture density underflow: no component has finite log density at this point");
    }
    std::fill(out.begin(), out.end(), 0.0);
    double norm = 0.0;
    const double ratio = k.b_dot / k.b;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            const double w = std::exp(scratch.log_w[i * r + j] - max_log);
            if (w == 0.0) continue;
            norm += w;
            for (std::size_t c = 0; c < d; ++c) {
                const double x1 = inst.x1_atoms(i, c);
                const double eta = inst.eta_atoms(j, c);
                const double residual = x[c] - k.a * x1 - k.c * eta;
                out[c] += w * (opts.adot_scale * k.a_dot * x1 + ratio * residual + k.c_dot * eta);
            }
        }
    }
    for (double& v : out) v /= norm;
}

std::size_t pick(std::span<const double> weights, RngStream& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) return i;
    }
    return weights.size() - 1;
}

void check_simplex(std::span<const double> w, const char* what) {
    if (w.empty()) throw DomainError(std::string(what) + " weights are empty");
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw DomainError(std::string(what) + " weights must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError(std::string(what) + " weights must sum to 1");
}

}  // namespace

double mode_accuracy(const Tensor& samples, std::span<const int> target_labels, const Tensor& mode_centers) {
    check_centers(samples, mode_centers);
    if (target_labels.size() != samples.rows()) {
        throw ShapeError("mode_accuracy: " + std::to_string(target_labels.size()) + " labels for " +
                         std::to_string(samples.rows()) + " samples");
    }
    const std::vector<int> nearest = nearest_centers(samples, mode_centers);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < nearest.size(); ++i) hits += nearest[i] == target_labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(nearest.size());
}

double distance_error(const Tensor& samples, const Tensor& mode_centers) {
    check_centers(samples, mode_centers);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < mode_centers.rows(); ++k) {
            best = std::min(best, squared_distance(samples.row(i), mode_centers.row(k)));
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(samples.rows());
}

std::vector<int> nearest_centers(const Tensor& samples, const Tensor& mode_centers) {
    check_centers(samples, mode_centers);
    std::vector<int> out(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t k = 0; k < mode_centers.rows(); ++k) {
            const double d = squared_distance(samples.row(i), mode_centers.row(k));
            if (d < best) {
                best = d;
                arg = static_cast<int>(k);
            }
        }
        out[i] = arg;
    }
    return out;
}

double energy_distance(const Tensor& a, const Tensor& b) {
    if (a.rows() == 0 || b.rows() == 0) throw DomainError("energy distance needs non-empty clouds");
    if (a.cols() != b.cols()) throw ShapeError("energy distance clouds differ in dimension");
    auto mean_dist = [](const Tensor& p, const Tensor& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.rows(); ++i) {
            for (std::size_t j = 0; j < q.rows(); ++j) s += std::sqrt(squared_distance(p.row(i), q.row(j)));
        }
        return s / (static_cast<double>(p.rows()) * static_cast<double>(q.rows()));
    };
    const double value = 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
    // Rounding can leave a tiny negative residue for (near-)identical clouds.
    return std::max(0.0, value);
}

PermutationTest energy_permutation_test(const Tensor& a, const Tensor& b, std::size_t permutations, double quantile,
                                        RngStream& rng) {
    if (a.rows() == 0 || b.rows() == 0) throw DomainError("energy distance needs non-empty clouds");
    if (a.cols() != b.cols()) throw ShapeError("energy distance clouds differ in dimension");
    if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("permutation quantile must lie in (0, 1)");
    const std::size_t n = a.rows();
    const std::size_t m = b.rows();
    const std::size_t d = a.cols();

    // Pool and center so single precision keeps relative accuracy.
    std::vector<double> center(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < n; ++i) center[c] += a(i, c);
        for (std::size_t i = 0; i < m; ++i) center[c] += b(i, c);
        center[c] /= static_cast<double>(n + m);
    }
    std::vector<std::vector<float>> pooled(d, std::vector<float>(n + m));
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < n; ++i) pooled[c][i] = static_cast<float>(a(i, c) - center[c]);
        for (std::size_t i = 0; i < m; ++i) pooled[c][n + i] = static_cast<float>(b(i, c) - center[c]);
    }

    std::vector<std::size_t> idx(n + m);
    std::iota(idx.begin(), idx.end(), 0);
    Eigen::ArrayXf scratch;
    const FloatCloud all = gather(pooled, idx);
    const double total = within_sum(all, scratch);

    auto statistic_for = [&](std::span<const std::size_t> order) {
        const double wa = within_sum(gather(pooled, order.first(n)), scratch);
        const double wb = within_sum(gather(pooled, order.subspan(n)), scratch);
        return energy_from_sums(total, wa, wb, n, m);
    };

    PermutationTest result;
    result.statistic = std::max(0.0, statistic_for(idx));
    result.permutations = permutations;
    if (permutations == 0) {
        result.threshold = std::numeric_limits<double>::infinity();
        return result;
    }
    std::vector<double> null_stats;
    null_stats.reserve(permutations);
    std::size_t at_least = 0;
    for (std::size_t p = 0; p < permutations; ++p) {
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
        const double s = statistic_for(idx);
        null_stats.push_back(s);
        if (s >= result.statistic) ++at_least;
    }
    std::sort(null_stats.begin(), null_stats.end());
    const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(permutations)));
    result.threshold = null_stats[std::min(permutations, std::max<std::size_t>(rank, 1)) - 1];
    result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + permutations);
    return result;
}

void OracleInstance::validate() const {
    if (x1_atoms.rows() == 0 || eta_atoms.rows() == 0) throw DomainError("oracle instance needs atoms");
    if (x1_atoms.cols() != eta_atoms.cols()) throw ShapeError("x1 and eta atoms differ in dimension");
    if (x1_weights.size() != x1_atoms.rows()) throw ShapeError("one weight per x1 atom required");
    if (eta_weights.size() != eta_atoms.rows()) throw ShapeError("one weight per eta atom required");
    check_simplex(x1_weights, "x1 atom");
    check_simplex(eta_weights, "eta atom");
    if (!(sigma0 > 0.0)) throw DomainError("oracle base sigma0 must be strictly positive");
}

OracleInstance OracleInstance::finite_support_default() {
    OracleInstance inst;
    inst.x1_atoms = Tensor::from_rows({{1.0, 0.0}, {-0.5, 0.8660254037844386}, {-0.5, -0.8660254037844386}});
    inst.x1_weights = {0.5, 0.3, 0.2};
    inst.eta_atoms = Tensor::from_rows({{1.5, 1.0}, {-1.0, 0.5}});
    inst.eta_weights = {0.6, 0.4};
    inst.sigma0 = 0.1;
    return inst;
}

Tensor exact_marginal_field(const OracleInstance& inst, const Tensor& x, double t, const FieldOptions& opts) {
    const std::vector<double> times(x.rows(), t);
    return exact_marginal_field_rows(inst, x, times, opts);
}

Tensor exact_marginal_field_rows(const OracleInstance& inst, const Tensor& x, std::span<const double> t,
                                 const FieldOptions& opts) {
    inst.validate();
    if (x.cols() != inst.dim()) throw ShapeError("field query dim does not match the oracle instance");
    if (t.size() != x.rows()) throw ShapeError("exact_marginal_field_rows: one time per row required");
    Tensor out(x.rows(), x.cols());
    MixtureScratch scratch;
    for (std::size_t row = 0; row < x.rows(); ++row) {
        const PathCoeffs k = inst.schedule.coeffs(t[row]);
        if (k.b == 0.0) throw DomainError("exact marginal field undefined where b(t) = 0 (t = 1)");
        marginal_field_row(inst, x.row(row), k, opts, out.row(row), scratch);
    }
    return out;
}

Tensor analytic_gaussian_field(const Tensor& x, double t, std::span<const double> x1, double sigma0,
                               const PathSchedule& schedule, double eta_sigma) {
    if (x.cols() != x1.size()) throw ShapeError("analytic field: x1 dim does not match the query points");
    const PathCoeffs k = schedule.coeffs(t);
    const double s0 = sigma0 * sigma0;
    const double se = eta_sigma * eta_sigma;
    const double var = k.b * k.b * s0 + k.c * k.c * se;
    if (var == 0.0) throw DomainError("analytic field undefined: path collapsed (b^2 sigma0^2 + c^2 = 0)");
    const double gain = (k.b_dot * k.b * s0 + k.c_dot * k.c * se) / var;
    Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = k.a_dot * x1[c] + gain * (x(r, c) - k.a * x1[c]);
    }
    return out;
}

PathPairSampler finite_support_sampler(const OracleInstance& inst) {
    inst.validate();
    return [inst](double t, std::size_t n, RngStream& rng, Tensor& xt, Tensor& xdot) {
        const PathCoeffs k = inst.schedule.coeffs(t);
        const std::size_t d = inst.dim();
        xt = Tensor(n, d);
        xdot = Tensor(n, d);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = pick(inst.x1_weights, rng);
            const std::size_t j = pick(inst.eta_weights, rng);
            for (std::size_t c = 0; c < d; ++c) {
                const double x0 = inst.sigma0 * rng.normal();
                xt(r, c) = k.a * inst.x1_atoms(i, c) + k.b * x0 + k.c * inst.eta_atoms(j, c);
                xdot(r, c) = k.a_dot * inst.x1_atoms(i, c) + k.b_dot * x0 + k.c_dot * inst.eta_atoms(j, c);
            }
        }
    };
}

PathPairSampler gaussian_point_sampler(std::vector<double> x1, double sigma0, PathSchedule schedule,
                                       double eta_sigma) {
    return [x1 = std::move(x1), sigma0, schedule = std::move(schedule), eta_sigma](
               double t, std::size_t n, RngStream& rng, Tensor& xt, Tensor& xdot) {
        const PathCoeffs k = schedule.coeffs(t);
        const std::size_t d = x1.size();
        xt = Tensor(n, d);
        xdot = Tensor(n, d);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                const double x0 = sigma0 * rng.normal();
                const double eta = eta_sigma * rng.normal();
                xt(r, c) = k.a * x1[c] + k.b * x0 + k.c * eta;
                xdot(r, c) = k.a_dot * x1[c] + k.b_dot * x0 + k.c_dot * eta;
            }
        }
    };
}

ConditionalEstimate conditional_velocity_mc(const PathPairSampler& sampler, std::span<const double> x, double t,
                                            double radius, std::size_t target_accepts, RngStream& rng,
                                            std::size_t max_draws) {
    const std::size_t d = x.size();
    const double r2 = radius * radius;
    std::vector<double> sum(d, 0.0);
    std::vector<double> sum_sq(d, 0.0);
    ConditionalEstimate est;
    Tensor xt;
    Tensor xdot;
    constexpr std::size_t kChunk = 100000;
    while (est.accepted < target_accepts && est.drawn < max_draws) {
        sampler(t, kChunk, rng, xt, xdot);
        if (xt.cols() != d) throw ShapeError("sampler dim does not match the query point");
        est.drawn += kChunk;
        for (std::size_t r = 0; r < kChunk; ++r) {
            if (squared_distance(xt.row(r), x) > r2) continue;
            ++est.accepted;
            for (std::size_t c = 0; c < d; ++c) {
                sum[c] += xdot(r, c);
                sum_sq[c] += xdot(r, c) * xdot(r, c);
            }
        }
    }
    if (est.accepted < 2) throw NumericError("conditional_velocity_mc: fewer than two samples landed in the ball");
    const auto n = static_cast<double>(est.accepted);
    est.mean.resize(d);
    est.stderr_.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        est.mean[c] = sum[c] / n;
        const double var = std::max(0.0, (sum_sq[c] - n * est.mean[c] * est.mean[c]) / (n - 1.0));
        est.stderr_[c] = std::sqrt(var / n);
    }
    return est;
}

Tensor sample_path_direct(const OracleInstance& inst, double t, std::size_t n, RngStream& rng) {
    Tensor xt;
    Tensor xdot;
    finite_support_sampler(inst)(t, n, rng, xt, xdot);
    return xt;
}

Tensor push_particles(const OracleInstance& inst, std::size_t n, std::size_t steps, double t_eval, RngStream& rng,
                      const FieldOptions& opts) {
    inst.validate();
    Tensor x0 = sample_base(rng, inst.dim(), n, inst.sigma0);
    if (t_eval == 0.0) return x0;
    if (!(t_eval > 0.0 && t_eval < 1.0)) throw DomainError("continuity check needs t_eval in [0, 1)");
    const VectorField field = [&](const Tensor& x, double t) { return exact_marginal_field(inst, x, t, opts); };
    SampleResult pushed = integrate_euler(field, std::move(x0), steps, false, t_eval);
    return std::move(pushed.samples);
}

ContinuityReport continuity_check(const OracleInstance& inst, std::size_t particles, std::size_t steps,
                                  double t_eval, std::uint64_t seed, const ContinuityOptions& opts) {
    if (!(t_eval >= 0.0 && t_eval < 1.0)) throw DomainError("continuity check needs t_eval in [0, 1)");
    const RngStream root(seed);
    RngStream push_rng = root.split("push");
    RngStream direct_rng = root.split("direct");
    RngStream perm_rng = root.split("permutation");
    const Tensor pushed = push_particles(inst, particles, steps, t_eval, push_rng, opts.field);
    const Tensor direct = sample_path_direct(inst, t_eval, particles, direct_rng);

    const std::size_t perms = opts.threshold ? 0 : opts.permutations;
    const PermutationTest test = energy_permutation_test(pushed, direct, perms, opts.quantile, perm_rng);
    ContinuityReport report;
    report.discrepancy = test.statistic;
    report.threshold = opts.threshold ? *opts.threshold : test.threshold;
    report.p_value = test.p_value;
    report.passed = report.discrepancy <= report.threshold;
    return report;
}

double LossEquivalenceReport::grad_relative_l2() const {
    double diff = 0.0;
    double base = 0.0;
    for (std::size_t i = 0; i < grad_marginal.size(); ++i) {
        const double e = grad_marginal[i] - grad_conditional[i];
        diff += e * e;
        base += grad_marginal[i] * grad_marginal[i];
    }
    return base == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : std::sqrt(diff / base);
}

LossEquivalenceStudy loss_equivalence_study(const OracleInstance& inst, std::span<const VelocityModel> models,
                                            std::size_t num_samples, std::uint64_t seed, std::size_t chunk) {
    inst.validate();
    if (num_samples < 2) throw DomainError("loss equivalence study needs at least two samples");
    const std::size_t d = inst.dim();
    for (const auto& model : models) {
        if (model.dim() != d || model.label_conditioned()) {
            throw ShapeError("loss equivalence needs unconditional models of the instance dimension");
        }
    }
    const std::size_t n_models = models.size();
    std::vector<MlpGrads> g_fm;
    std::vector<MlpGrads> g_aux;
    for (const auto& model : models) {
        g_fm.push_back(model.net().zero_grads());
        g_aux.push_back(model.net().zero_grads());
    }
    // Running sums of per-sample gaps and of paired gap differences vs model 0.
    std::vector<double> loss_fm(n_models, 0.0), loss_aux(n_models, 0.0);
    std::vector<double> gap_sq(n_models, 0.0), diff_sum(n_models, 0.0), diff_sq(n_models, 0.0);

    RngStream rng = RngStream(seed).split("loss-equivalence");
    const double inv_n = 1.0 / static_cast<double>(num_samples);
    std::size_t done = 0;
    MlpCache cache;
    std::vector<double> gap0;
    while (done < num_samples) {
        const std::size_t n = std::min(chunk, num_samples - done);
        done += n;
        Tensor xt(n, d);
        Tensor xdot(n, d);
        std::vector<double> t(n);
        for (std::size_t r = 0; r < n; ++r) {
            t[r] = rng.uniform();
            const PathCoeffs k = inst.schedule.coeffs(t[r]);
            const std::size_t i = pick(inst.x1_weights, rng);
            const std::size_t j = pick(inst.eta_weights, rng);
            for (std::size_t c = 0; c < d; ++c) {
                const double x0 = inst.sigma0 * rng.normal();
                xt(r, c) = k.a * inst.x1_atoms(i, c) + k.b * x0 + k.c * inst.eta_atoms(j, c);
                xdot(r, c) = k.a_dot * inst.x1_atoms(i, c) + k.b_dot * x0 + k.c_dot * inst.eta_atoms(j, c);
            }
        }
        const Tensor u = exact_marginal_field_rows(inst, xt, t);

        gap0.assign(n, 0.0);
        for (std::size_t mi = 0; mi < n_models; ++mi) {
            const VelocityModel& model = models[mi];
            const Tensor v = model.net().forward(model.features(xt, t), cache);
            Tensor up_fm(n, d);
            Tensor up_aux(n, d);
            for (std::size_t r = 0; r < n; ++r) {
                double sq_fm = 0.0;
                double sq_aux = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double e_fm = v(r, c) - u(r, c);
                    const double e_aux = v(r, c) - xdot(r, c);
                    sq_fm += e_fm * e_fm;
                    sq_aux += e_aux * e_aux;
                    up_fm(r, c) = 2.0 * e_fm * inv_n;
                    up_aux(r, c) = 2.0 * e_aux * inv_n;
                }
                loss_fm[mi] += sq_fm;
                loss_aux[mi] += sq_aux;
                const double gap = sq_fm - sq_aux;
                gap_sq[mi] += gap * gap;
                if (mi == 0) gap0[r] = gap;
                const double diff = gap - gap0[r];
                diff_sum[mi] += diff;
                diff_sq[mi] += diff * diff;
            }
            model.net().backward(cache, up_fm, g_fm[mi]);
            model.net().backward(cache, up_aux, g_aux[mi]);
        }
    }

    LossEquivalenceStudy study;
    const auto ns = static_cast<double>(num_samples);
    for (std::size_t mi = 0; mi < n_models; ++mi) {
        LossEquivalenceReport rep;
        rep.grad_marginal = g_fm[mi].flatten();
        rep.grad_conditional = g_aux[mi].flatten();
        rep.loss_marginal = loss_fm[mi] / ns;
        rep.loss_conditional = loss_aux[mi] / ns;
        rep.gap = rep.loss_marginal - rep.loss_conditional;
        const double var = std::max(0.0, (gap_sq[mi] - ns * rep.gap * rep.gap) / (ns - 1.0));
        rep.gap_stderr = std::sqrt(var / ns);
        study.reports.push_back(std::move(rep));
        if (mi > 0) {
            const double mean = diff_sum[mi] / ns;
            const double dvar = std::max(0.0, (diff_sq[mi] - ns * mean * mean) / (ns - 1.0));
            const double se = std::sqrt(dvar / ns);
            study.gap_difference_z.push_back(se == 0.0 ? 0.0 : std::abs(mean) / se);
        }
    }
    return study;
}

}  // namespace auxfm
