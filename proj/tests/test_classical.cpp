#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qrecover/classical.hpp"

using namespace qrecover;

namespace {

DenseLayer random_layer(int in, int out, bool bias, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return make_dense(in, out, bias, rng);
}

}  // namespace

TEST_CASE("dense_forward fixed cases") {
    DenseLayer id;
    id.in_dim = id.out_dim = 2;
    id.weights = {1, 0, 0, 1};
    id.bias = {0, 0};
    const auto y = dense_forward(id, {1, 2});
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(2.0));

    DenseLayer sum;
    sum.in_dim = 2;
    sum.out_dim = 1;
    sum.weights = {1, 1};
    sum.bias = {0.5};
    CHECK(dense_forward(sum, {2, 3})[0] == doctest::Approx(5.5));

    CHECK_THROWS_AS(dense_forward(sum, {1, 2, 3}), ShapeError);
}

TEST_CASE("dense_forward matches naive triple-loop oracle") {
    const DenseLayer l = random_layer(3, 4, true, 100);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> x = {u(rng), u(rng), u(rng)};
        const auto y = dense_forward(l, x);
        for (int o = 0; o < 4; ++o) {
            double acc = l.bias[o];
            for (int i = 0; i < 3; ++i) acc += l.weights[o * 3 + i] * x[i];
            CHECK(y[o] == doctest::Approx(acc).epsilon(1e-14));
        }
    }
}

TEST_CASE("make_dense: fan-in bounds, zero bias, seeded determinism") {
    const DenseLayer a = random_layer(16, 8, true, 7);
    const DenseLayer b = random_layer(16, 8, true, 7);
    CHECK(a.weights == b.weights);
    const double bound = std::sqrt(1.0 / 16.0);
    for (double w : a.weights) {
        CHECK(w >= -bound);
        CHECK(w <= bound);
    }
    for (double bv : a.bias) CHECK(bv == 0.0);
    CHECK(random_layer(16, 8, false, 7).bias.empty());
}

TEST_CASE("leaky_relu piecewise definition, literal negative slope") {
    CHECK(leaky_relu({2}, -0.3)[0] == doctest::Approx(2.0));
    CHECK(leaky_relu({-1}, -0.3)[0] == doctest::Approx(0.3));
    const auto y = leaky_relu({-2, 0, 5}, 0.3);
    CHECK(y[0] == doctest::Approx(-0.6));
    CHECK(y[1] == doctest::Approx(0.0));
    CHECK(y[2] == doctest::Approx(5.0));
}

TEST_CASE("leaky_relu_backward: subgradient at zero is 1") {
    const auto g = leaky_relu_backward({-1, 0, 2}, -0.3, {1, 1, 1});
    CHECK(g[0] == doctest::Approx(-0.3));
    CHECK(g[1] == doctest::Approx(1.0));
    CHECK(g[2] == doctest::Approx(1.0));
}

TEST_CASE("dense_backward matches central finite differences") {
    const DenseLayer l = random_layer(4, 3, true, 11);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(4), up(3);
    for (auto& v : x) v = u(rng);
    for (auto& v : up) v = u(rng);

    // scalar objective: sum_o up[o] * y[o]
    const auto objective = [&](const DenseLayer& layer, const std::vector<double>& input) {
        const auto y = dense_forward(layer, input);
        double acc = 0.0;
        for (int o = 0; o < 3; ++o) acc += up[o] * y[o];
        return acc;
    };

    const DenseGrads g = dense_backward(l, x, up);
    const double h = 1e-6;
    for (std::size_t j = 0; j < l.weights.size(); ++j) {
        DenseLayer lp = l, lm = l;
        lp.weights[j] += h;
        lm.weights[j] -= h;
        const double fd = (objective(lp, x) - objective(lm, x)) / (2 * h);
        CHECK(std::abs(g.d_weights[j] - fd) < 1e-6 * (1.0 + std::abs(fd)));
    }
    for (std::size_t j = 0; j < l.bias.size(); ++j) {
        DenseLayer lp = l, lm = l;
        lp.bias[j] += h;
        lm.bias[j] -= h;
        const double fd = (objective(lp, x) - objective(lm, x)) / (2 * h);
        CHECK(std::abs(g.d_bias[j] - fd) < 1e-6 * (1.0 + std::abs(fd)));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (objective(l, xp) - objective(l, xm)) / (2 * h);
        CHECK(std::abs(g.d_input[j] - fd) < 1e-6 * (1.0 + std::abs(fd)));
    }
}

TEST_CASE("adam_step fixed cases") {
    // zero gradient leaves params unchanged
    std::vector<double> p = {1.0, -2.0};
    AdamState st = AdamState::make(2, 0.001);
    adam_step(p, std::vector<double>{0.0, 0.0}, st);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);

    // scalar step 1: m_hat = g, v_hat = g^2 -> update lr * g/(|g|+eps)
    std::vector<double> w = {1.0};
    AdamState s1 = AdamState::make(1, 0.001);
    adam_step(w, std::vector<double>{1.0}, s1);
    CHECK(w[0] == doctest::Approx(1.0 - 0.001 * (1.0 / (1.0 + 1e-8))).epsilon(1e-12));

    // 10 steps on f(w) = w^2 strictly decrease |w|
    std::vector<double> q = {1.0};
    AdamState s2 = AdamState::make(1, 0.01);
    double prev = std::abs(q[0]);
    for (int i = 0; i < 10; ++i) {
        adam_step(q, std::vector<double>{2.0 * q[0]}, s2);
        CHECK(std::abs(q[0]) < prev);
        prev = std::abs(q[0]);
    }

    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, st), ShapeError);
}

TEST_CASE("adam determinism") {
    auto run = [] {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        std::vector<double> p(32), g(32);
        for (auto& v : p) v = u(rng);
        AdamState st = AdamState::make(32, 0.001);
        for (int step = 0; step < 50; ++step) {
            for (auto& v : g) v = u(rng);
            adam_step(p, g, st);
        }
        return p;
    };
    CHECK(run() == run());
}

TEST_CASE("mse_and_rmse") {
    const auto zero = mse_and_rmse({1, 2, 3}, {1, 2, 3});
    CHECK(zero.first == 0.0);
    CHECK(zero.second == 0.0);

    const auto half = mse_and_rmse({1, 0}, {0, 0});
    CHECK(half.first == doctest::Approx(0.5));
    CHECK(half.second == doctest::Approx(std::sqrt(0.5)));

    CHECK_THROWS_AS(mse_and_rmse({}, {}), EmptyBatchError);
    CHECK_THROWS_AS(mse_and_rmse({1}, {1, 2}), ShapeError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<double> a(100), b(100);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    const auto got = mse_and_rmse(a, b);
    CHECK(got.first == doctest::Approx(acc / 100.0).epsilon(1e-13));
    CHECK(got.second == doctest::Approx(std::sqrt(acc / 100.0)).epsilon(1e-13));
}
