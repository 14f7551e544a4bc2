#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auxfm/datasets.hpp"
#include "auxfm/error.hpp"
#include "auxfm/metrics.hpp"

using namespace auxfm;

TEST_CASE("mode accuracy and distance error by hand") {
    const Tensor centers = Tensor::from_rows({{1, 0}, {-1, 0}});
    const Tensor samples = Tensor::from_rows({{0.9, 0.0}, {-1.0, 0.5}, {0.0, 0.0}});
    const std::vector<int> target{0, 0, 0};
    CHECK(nearest_centers(samples, centers) == std::vector<int>{0, 1, 0});  // tie -> lowest index
    CHECK(mode_accuracy(samples, target, centers) == doctest::Approx(2.0 / 3.0));
    CHECK(distance_error(samples, centers) == doctest::Approx((0.1 + 0.5 + 1.0) / 3.0));
    CHECK_THROWS_AS(mode_accuracy(samples, std::vector<int>{0}, centers), ShapeError);
}

TEST_CASE("energy distance basics") {
    const Tensor a = Tensor::from_rows({{0, 0}, {1, 0}});
    CHECK(energy_distance(a, a) == 0.0);
    // single points: 2|a-b| - 0 - 0
    CHECK(energy_distance(Tensor::from_rows({{0, 0}}), Tensor::from_rows({{3, 4}})) == doctest::Approx(10.0));
    // {0,1} vs {2}: 2*(2+1)/2 - (0+1+1+0)/4 - 0 = 2.5
    CHECK(energy_distance(a, Tensor::from_rows({{2, 0}})) == doctest::Approx(2.5));
    CHECK_THROWS(energy_distance(Tensor(0, 2), a));
}

TEST_CASE("energy distance is symmetric and nonnegative") {
    RngStream rng(1);
    for (int rep = 0; rep < 5; ++rep) {
        Tensor a = sample_base(rng, 2, 30), b = sample_base(rng, 2, 45);
        CHECK(energy_distance(a, b) >= 0.0);
        CHECK(energy_distance(a, b) == doctest::Approx(energy_distance(b, a)));
    }
}

TEST_CASE("permutation test keeps same-law samples and rejects a shift") {
    RngStream rng(2);
    const Tensor a = sample_base(rng, 2, 400), b = sample_base(rng, 2, 400);
    Tensor shifted = sample_base(rng, 2, 400);
    for (std::size_t r = 0; r < shifted.rows(); ++r) shifted(r, 0) += 1.0;
    RngStream perm(3);
    const PermutationTest same = energy_permutation_test(a, b, 200, 0.99, perm);
    CHECK_FALSE(same.rejected());
    CHECK(same.p_value > 0.01);
    CHECK(same.statistic == doctest::Approx(energy_distance(a, b)).epsilon(1e-4));
    const PermutationTest diff = energy_permutation_test(a, shifted, 200, 0.99, perm);
    CHECK(diff.rejected());
    CHECK(diff.p_value == doctest::Approx(1.0 / 201.0));
}

TEST_CASE("oracle instance validation") {
    OracleInstance inst = OracleInstance::finite_support_default();
    CHECK_NOTHROW(inst.validate());
    inst.x1_weights = {0.5, 0.5};
    CHECK_THROWS(inst.validate());
    inst = OracleInstance::finite_support_default();
    inst.sigma0 = 0.0;
    CHECK_THROWS(inst.validate());
}

TEST_CASE("exact field reduces to the analytic Gaussian case for one atom each") {
    // One x1 atom and one eta atom: u = a' x1 + c' eta + (b'/b)(x - a x1 - c eta)
    OracleInstance inst;
    inst.x1_atoms = Tensor::from_rows({{1.0, 0.5}});
    inst.x1_weights = {1.0};
    inst.eta_atoms = Tensor::from_rows({{-1.0, 2.0}});
    inst.eta_weights = {1.0};
    inst.sigma0 = 0.3;
    const Tensor x = Tensor::from_rows({{0.2, 0.1}, {-1.0, 3.0}});
    for (double t : {0.1, 0.5, 0.8}) {
        const PathCoeffs k = inst.schedule.coeffs(t);
        const Tensor u = exact_marginal_field(inst, x, t);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 2; ++c) {
                const double mean = k.a * inst.x1_atoms(0, c) + k.c * inst.eta_atoms(0, c);
                const double want = k.a_dot * inst.x1_atoms(0, c) + k.c_dot * inst.eta_atoms(0, c) +
                                    k.b_dot / k.b * (x(r, c) - mean);
                CHECK(u(r, c) == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(exact_marginal_field(inst, x, 1.0), DomainError);
}

TEST_CASE("exact field stays finite far from every component") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    const Tensor x = Tensor::from_rows({{40.0, -30.0}, {0.0, 0.0}});
    CHECK(exact_marginal_field(inst, x, 0.95).all_finite());
    const std::vector<double> t{0.3, 0.95};
    const Tensor rows = exact_marginal_field_rows(inst, x, t);
    const Tensor single = exact_marginal_field(inst, x, 0.95);
    CHECK(rows(1, 0) == single(1, 0));
}

TEST_CASE("analytic Gaussian field matches rejection Monte Carlo") {
    const std::vector<double> x1{1.0, 0.0};
    const PathSchedule s = PathSchedule::linear_bump();
    const PathPairSampler sampler = gaussian_point_sampler(x1, 1.0, s, 1.0);
    RngStream rng(4);
    const std::vector<double> x{0.3, 0.2};
    const double t = 0.4;
    const ConditionalEstimate est = conditional_velocity_mc(sampler, x, t, 0.05, 20000, rng);
    const Tensor u = analytic_gaussian_field(Tensor(1, 2, x), t, x1, 1.0, s);
    for (std::size_t c = 0; c < 2; ++c) {
        // ball radius adds an O(r^2) bias on top of the Monte Carlo error
        CHECK(std::abs(est.mean[c] - u(0, c)) <= 5.0 * est.stderr_[c] + 0.01);
    }
}

TEST_CASE("pushing particles with the exact field reproduces the direct marginal") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    RngStream rng(5);
    const Tensor pushed = push_particles(inst, 2000, 100, 0.5, rng);
    const Tensor direct = sample_path_direct(inst, 0.5, 2000, rng);
    RngStream perm(6);
    CHECK_FALSE(energy_permutation_test(pushed, direct, 100, 0.99, perm).rejected());
    RngStream rng2(5);
    const Tensor at_zero = push_particles(inst, 10, 100, 0.0, rng2);
    CHECK(at_zero.all_finite());
}

TEST_CASE("negative control field is rejected") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    ContinuityOptions opts;
    opts.permutations = 100;
    opts.field.adot_scale = 2.0;
    const ContinuityReport r = continuity_check(inst, 2000, 100, 0.5, 7, opts);
    CHECK_FALSE(r.passed);
}

TEST_CASE("loss equivalence: identical gradients, model-independent gap") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    RngStream rng(8);
    std::vector<VelocityModel> models;
    for (int i = 0; i < 3; ++i) models.push_back(VelocityModel::create(2, NetShape{{16}, Activation::tanh}, rng));
    const LossEquivalenceStudy study = loss_equivalence_study(inst, models, 50000, 9);
    REQUIRE(study.reports.size() == 3);
    REQUIRE(study.gap_difference_z.size() == 2);
    for (const auto& r : study.reports) {
        CHECK(r.grad_relative_l2() < 0.05);
        CHECK(r.gap <= 0.0);
        CHECK(r.gap == doctest::Approx(r.loss_marginal - r.loss_conditional));
    }
    for (double z : study.gap_difference_z) CHECK(std::abs(z) < 5.0);
}

TEST_CASE("accuracy examples: exact, antipodal, half adjacent, empty") {
    RngStream rng(10);
    const LabeledDataset ring = make_ring(8, 1, 0.0, rng);
    const std::vector<int> labels{0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(mode_accuracy(ring.mode_centers, labels, ring.mode_centers) == 1.0);
    CHECK(distance_error(ring.mode_centers, ring.mode_centers) == 0.0);
    const std::vector<int> antipodal{4, 5, 6, 7, 0, 1, 2, 3};
    CHECK(mode_accuracy(ring.mode_centers, antipodal, ring.mode_centers) == 0.0);
    const std::vector<int> half{0, 2, 2, 4, 4, 6, 6, 0};  // odd rows target the neighbouring mode
    CHECK(mode_accuracy(ring.mode_centers, half, ring.mode_centers) == 0.5);
    CHECK(distance_error(Tensor::from_rows({{1.3, 0.0}}), ring.mode_centers) == doctest::Approx(0.3));
    CHECK_THROWS_AS(mode_accuracy(Tensor(0, 2), {}, ring.mode_centers), DomainError);
    CHECK_THROWS_AS(distance_error(Tensor(0, 2), ring.mode_centers), DomainError);
}

TEST_CASE("distance error of a uniform disc is 2 rho / 3") {
    RngStream rng(11);
    const Tensor centers = Tensor::from_rows({{0.0, 0.0}, {10.0, 0.0}});
    const double rho = 0.4;
    Tensor pts(40000, 2);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        double x, y;
        do {
            x = rng.uniform(-1.0, 1.0);
            y = rng.uniform(-1.0, 1.0);
        } while (x * x + y * y > 1.0);
        pts(i, 0) = rho * x;
        pts(i, 1) = rho * y;
    }
    CHECK(std::abs(distance_error(pts, centers) / (2.0 * rho / 3.0) - 1.0) < 0.02);
}

TEST_CASE("metrics are invariant under a joint rotation") {
    RngStream rng(12);
    const LabeledDataset ring = make_ring(16, 1, 0.0, rng);
    const Tensor pts = sample_base(rng, 2, 500);
    std::vector<int> labels(500);
    for (std::size_t i = 0; i < 500; ++i) labels[i] = static_cast<int>(i % 16);
    const double th = 0.7;
    auto rotate = [&](const Tensor& t) {
        Tensor out(t.rows(), 2);
        for (std::size_t r = 0; r < t.rows(); ++r) {
            out(r, 0) = std::cos(th) * t(r, 0) - std::sin(th) * t(r, 1);
            out(r, 1) = std::sin(th) * t(r, 0) + std::cos(th) * t(r, 1);
        }
        return out;
    };
    CHECK(mode_accuracy(rotate(pts), labels, rotate(ring.mode_centers)) ==
          mode_accuracy(pts, labels, ring.mode_centers));
    CHECK(distance_error(rotate(pts), rotate(ring.mode_centers)) ==
          doctest::Approx(distance_error(pts, ring.mode_centers)).epsilon(1e-12));
}

TEST_CASE("analytic Gaussian field closed-form examples") {
    const std::vector<double> x1{1.0, -2.0};
    const PathSchedule s = PathSchedule::linear_bump();
    const Tensor x = Tensor::from_rows({{0.3, 0.4}});
    const Tensor u0 = analytic_gaussian_field(x, 0.0, x1, 1.0, s);
    CHECK(u0(0, 0) == doctest::Approx(1.0 - 0.3));
    CHECK(u0(0, 1) == doctest::Approx(-2.0 - 0.4));
    const double t = 0.35;
    const Tensor mean = Tensor::from_rows({{t * x1[0], t * x1[1]}});
    const Tensor um = analytic_gaussian_field(mean, t, x1, 0.5, s);
    CHECK(um(0, 0) == doctest::Approx(1.0));
    CHECK(um(0, 1) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(analytic_gaussian_field(x, 1.0, x1, 1.0, s), DomainError);
}

TEST_CASE("exact field with a zero eta atom equals the analytic field without the c term") {
    OracleInstance inst;
    inst.x1_atoms = Tensor::from_rows({{0.7, -0.3}});
    inst.x1_weights = {1.0};
    inst.eta_atoms = Tensor::from_rows({{0.0, 0.0}});
    inst.eta_weights = {1.0};
    inst.sigma0 = 1.0;
    RngStream rng(13);
    const Tensor x = sample_base(rng, 2, 50, 2.0);
    for (double t : {0.0, 0.2, 0.5, 0.9}) {
        const Tensor exact = exact_marginal_field(inst, x, t);
        const Tensor analytic = analytic_gaussian_field(x, t, std::vector<double>{0.7, -0.3}, 1.0, inst.schedule, 0.0);
        CHECK(max_abs_diff(exact, analytic) < 1e-10);
    }
}

TEST_CASE("far from every component the field follows the nearest component") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    const double t = 0.5;
    const PathCoeffs k = inst.schedule.coeffs(t);
    // component (x1 atom 0, eta atom 0) has mean (0.5 + 0.375, 0.25); go 10 sigma past it
    const double sd = k.b * inst.sigma0;
    const double mx = k.a * 1.0 + k.c * 1.5, my = k.c * 1.0;
    const Tensor x = Tensor::from_rows({{mx + 14.0 * sd, my + 10.0 * sd}});
    const Tensor u = exact_marginal_field(inst, x, t);
    const double vx = k.a_dot * 1.0 + k.b_dot / k.b * (x(0, 0) - mx) + k.c_dot * 1.5;
    const double vy = k.b_dot / k.b * (x(0, 1) - my) + k.c_dot * 1.0;
    CHECK(std::abs(u(0, 0) - vx) <= 1e-6 * std::abs(vx));
    CHECK(std::abs(u(0, 1) - vy) <= 1e-6 * std::abs(vy));
}

TEST_CASE("symmetric atoms give a zero first coordinate on the axis") {
    OracleInstance inst;
    inst.x1_atoms = Tensor::from_rows({{1.0, 0.0}, {-1.0, 0.0}});
    inst.x1_weights = {0.5, 0.5};
    inst.eta_atoms = Tensor::from_rows({{0.0, 0.0}});
    inst.eta_weights = {1.0};
    const Tensor x = Tensor::from_rows({{0.0, 0.3}, {0.0, -2.0}});
    const Tensor u = exact_marginal_field(inst, x, 0.6);
    CHECK(std::abs(u(0, 0)) < 1e-15);
    CHECK(std::abs(u(1, 0)) < 1e-15);
}

TEST_CASE("Monte Carlo conditioning in a 0.01 ball matches the analytic field") {
    const std::vector<double> x1{1.0, 0.0};
    const PathSchedule s = PathSchedule::linear_bump();
    RngStream rng(14);
    const std::vector<double> x{0.5, 0.1};
    const double t = 0.4;
    const ConditionalEstimate est = conditional_velocity_mc(gaussian_point_sampler(x1, 1.0, s), x, t, 0.01, 2000, rng);
    REQUIRE(est.accepted >= 2000);
    const Tensor u = analytic_gaussian_field(Tensor(1, 2, x), t, x1, 1.0, s);
    for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(est.mean[c] - u(0, c)) <= 3.0 * est.stderr_[c]);
}

TEST_CASE("conditional-loss minimizer matches the exact mixture field") {
    OracleInstance inst = OracleInstance::finite_support_default();
    inst.sigma0 = 0.5;  // keeps the acceptance rate of a small ball workable
    RngStream rng(15);
    const double t = 0.5;
    const std::vector<double> x{0.4, 0.3};
    const ConditionalEstimate est = conditional_velocity_mc(finite_support_sampler(inst), x, t, 0.02, 3000, rng);
    REQUIRE(est.accepted >= 3000);
    const Tensor u = exact_marginal_field(inst, Tensor(1, 2, x), t);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(std::abs(est.mean[c] - u(0, c)) <= 3.0 * est.stderr_[c] + 0.002);
    }
}

TEST_CASE("continuity at t = 0 and for a single-atom instance at t = 0.9") {
    const OracleInstance inst = OracleInstance::finite_support_default();
    ContinuityOptions opts;
    opts.permutations = 200;
    CHECK(continuity_check(inst, 2000, 50, 0.0, 16, opts).passed);

    OracleInstance single;
    single.x1_atoms = Tensor::from_rows({{1.0, 0.0}});
    single.x1_weights = {1.0};
    single.eta_atoms = Tensor::from_rows({{0.5, 1.0}});
    single.eta_weights = {1.0};
    single.sigma0 = 1.0;
    const ContinuityReport r = continuity_check(single, 10000, 200, 0.9, 17, opts);
    CHECK(r.passed);
    CHECK(r.discrepancy <= r.threshold);
}
