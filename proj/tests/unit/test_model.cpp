#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "auxfm/error.hpp"
#include "auxfm/model.hpp"

using namespace auxfm;

TEST_CASE("velocity features are [x, t] then a one-hot code") {
    RngStream rng(1);
    const VelocityModel plain = VelocityModel::create(2, NetShape{}, rng);
    const Tensor x = Tensor::from_rows({{1, 2}, {3, 4}});
    const std::vector<double> t{0.25, 0.75};
    CHECK(plain.features(x, t) == Tensor::from_rows({{1, 2, 0.25}, {3, 4, 0.75}}));

    const VelocityModel cond = VelocityModel::create(2, NetShape{}, rng, 3);
    const std::vector<int> labels{2, 0};
    CHECK(cond.features(x, t, labels) == Tensor::from_rows({{1, 2, 0.25, 0, 0, 1}, {3, 4, 0.75, 1, 0, 0}}));
    CHECK(cond.net().input_dim() == 6);
}

TEST_CASE("velocity feature errors") {
    RngStream rng(2);
    const VelocityModel plain = VelocityModel::create(2, NetShape{}, rng);
    const VelocityModel cond = VelocityModel::create(2, NetShape{}, rng, 3);
    const Tensor x(2, 2);
    const std::vector<double> t{0.1, 0.2};
    const std::vector<int> labels{0, 1};
    CHECK_THROWS_AS(plain.features(x, t, labels), ShapeError);
    CHECK_THROWS_AS(cond.features(x, t), ShapeError);
    CHECK_THROWS_AS(cond.features(x, t, std::vector<int>{0, 3}), DomainError);
    CHECK_THROWS_AS(plain.features(Tensor(2, 3), t), ShapeError);
    CHECK_THROWS_AS(plain.features(x, std::vector<double>{0.1}), ShapeError);
    CHECK_THROWS_AS(velocity(plain, x, 1.5), DomainError);
}

TEST_CASE("shared-time velocity equals per-row velocity") {
    RngStream rng(3);
    const VelocityModel m = VelocityModel::create(2, NetShape{{16}, Activation::silu}, rng);
    const Tensor x = Tensor::from_rows({{0.3, -0.2}, {1.0, 0.5}, {-1.0, 2.0}});
    const std::vector<double> t(3, 0.4);
    CHECK(velocity(m, x, 0.4) == velocity_rows(m, x, t));
}

TEST_CASE("zero models output zero") {
    const VelocityModel v = VelocityModel::zeros(3, NetShape{});
    CHECK(velocity(v, Tensor::from_rows({{1, 2, 3}}), 0.5) == Tensor(1, 3));
    const PrototypeModel p = PrototypeModel::zeros(4, 3);
    CHECK(prototype(p, 2) == Tensor(1, 3));
}

TEST_CASE("constructors check network dimensions") {
    CHECK_THROWS_AS(VelocityModel(Mlp::zeros({3, 8, 3}, Activation::tanh), 2), ShapeError);
    CHECK_THROWS_AS(VelocityModel(Mlp::zeros({3, 8, 2}, Activation::tanh), 2, 1), ShapeError);
    CHECK_NOTHROW(VelocityModel(Mlp::zeros({4, 8, 2}, Activation::tanh), 2, 1));
    CHECK_THROWS_AS(PrototypeModel(Mlp::zeros({3, 8, 2}, Activation::tanh), 3), ShapeError);
}

TEST_CASE("prototype encoding puts the null label last") {
    RngStream rng(4);
    const PrototypeModel p = PrototypeModel::create(3, 2, rng);
    const std::vector<int> labels{1, kNullLabel};
    CHECK(p.encode(labels) == Tensor::from_rows({{0, 1, 0, 0}, {0, 0, 0, 1}}));
    CHECK_THROWS_AS(p.encode(std::vector<int>{3}), DomainError);
    CHECK_THROWS_AS(p.encode(std::vector<int>{-2}), DomainError);
    // batched and single-row products may round differently
    const Tensor batch = prototypes(p, labels);
    CHECK(max_abs_diff(Tensor(1, 2, {batch(1, 0), batch(1, 1)}), prototype(p, kNullLabel)) < 1e-14);
}

TEST_CASE("scaled prototype multiplies every output") {
    RngStream rng(5);
    const PrototypeModel p = PrototypeModel::create(4, 2, rng);
    const PrototypeModel q = scaled_prototype(p, 3.0);
    const std::vector<int> labels{0, 1, 2, 3, kNullLabel};
    CHECK(max_abs_diff(prototypes(q, labels), 3.0 * prototypes(p, labels)) < 1e-14);
    CHECK(max_abs_diff(prototypes(scaled_prototype(p, 1.0), labels), prototypes(p, labels)) == 0.0);
}
