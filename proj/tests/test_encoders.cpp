#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qrecover/encoders.hpp"

using namespace qrecover;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> random_features(std::size_t len, std::mt19937_64& rng, double lo = -2.0,
                                    double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(len);
    for (auto& x : v) x = u(rng);
    return v;
}

double max_abs_diff_to_normalized(const QuantumState& s, const std::vector<double>& v) {
    std::vector<double> padded(s.dim(), 0.0);
    double nrm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        padded[i] = v[i];
        nrm += v[i] * v[i];
    }
    nrm = std::sqrt(nrm);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        worst = std::max(worst, std::abs(s.amps[i] - cplx(padded[i] / nrm)));
    }
    return worst;
}

}  // namespace

TEST_CASE("amplitude_encode fixed cases") {
    const QuantumState s = amplitude_encode({1, 0, 0, 0}, 2);
    CHECK(std::abs(s.amps[0] - cplx(1.0)) < 1e-12);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(s.amps[i]) < 1e-12);

    const QuantumState t = amplitude_encode({3, 4}, 1);
    CHECK(std::abs(t.amps[0] - cplx(0.6)) < 1e-12);
    CHECK(std::abs(t.amps[1] - cplx(0.8)) < 1e-12);
}

TEST_CASE("amplitude_encode error paths") {
    CHECK_THROWS_AS(amplitude_encode({0, 0, 0}, 2), EncodingError);
    CHECK_THROWS_AS(amplitude_encode({1, 2, 3, 4, 5}, 2), EncodingError);
    try {
        amplitude_encode({0.0, 0.0}, 1);
        FAIL("expected EncodingError");
    } catch (const EncodingError& e) {
        CHECK(e.kind == EncodingError::Kind::ZeroNorm);
    }
    try {
        amplitude_encode({1, 2, 3}, 1);
        FAIL("expected EncodingError");
    } catch (const EncodingError& e) {
        CHECK(e.kind == EncodingError::Kind::Overflow);
    }
}

TEST_CASE("amplitude_encode matches direct normalization, signed 256-vectors") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const auto v = random_features(256, rng);
        const QuantumState s = amplitude_encode(v, 8);
        CHECK(max_abs_diff_to_normalized(s, v) < 1e-10);
    }
}

TEST_CASE("round-trip property across sizes and qubit counts") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 10; ++n) {
        std::uniform_int_distribution<std::size_t> len(1, std::size_t{1} << n);
        for (int rep = 0; rep < 3; ++rep) {
            const auto v = random_features(len(rng), rng);
            double nrm = 0.0;
            for (double x : v) nrm += x * x;
            if (nrm < 1e-12) continue;
            const QuantumState s = amplitude_encode(v, n);
            CHECK(max_abs_diff_to_normalized(s, v) < 1e-10);
        }
    }
}

TEST_CASE("the compiled circuit itself prepares the state") {
    std::mt19937_64 rng(29);
    for (int n : {1, 2, 3, 5}) {
        const auto v = random_features(std::size_t{1} << n, rng);
        const EncodingPlan plan = amplitude_plan(v, n);
        REQUIRE(plan.ry_angle_tree.size() == (std::size_t{1} << n) - 1);
        const Circuit c = amplitude_circuit(plan);
        QuantumState s = new_zero_state(n);
        run_circuit(s, c);
        CHECK(max_abs_diff_to_normalized(s, v) < 1e-10);
    }
}

TEST_CASE("Mottonen gate counts: 2^n - 1 rotations, < 2^(n+1) CNOTs") {
    std::mt19937_64 rng(41);
    for (int n = 1; n <= 8; ++n) {
        const auto v = random_features(std::size_t{1} << n, rng);
        const Circuit c = amplitude_circuit(amplitude_plan(v, n));
        std::size_t rotations = 0, cnots = 0;
        for (const auto& op : c) {
            if (op.kind == OpKind::CNOT) {
                ++cnots;
            } else {
                CHECK(op.kind == OpKind::RY);  // real amplitudes: Ry-only
                ++rotations;
            }
        }
        CHECK(rotations == (std::size_t{1} << n) - 1);
        CHECK(cnots < (std::size_t{1} << (n + 1)));
    }
}

TEST_CASE("angle_encode fixed cases and cos identity") {
    const QuantumState z = angle_encode({0, 0, 0});
    CHECK(std::abs(z.amps[0] - cplx(1.0)) < 1e-14);
    for (int q = 0; q < 3; ++q) CHECK(expval_z(z, q) == doctest::Approx(1.0));

    const QuantumState pi_state = angle_encode({kPi});
    CHECK(expval_z(pi_state, 0) == doctest::Approx(-1.0).epsilon(1e-14));

    const std::vector<double> xs = {0.7, -1.3};
    const QuantumState s = angle_encode(xs);
    for (int q = 0; q < 2; ++q)
        CHECK(expval_z(s, q) == doctest::Approx(std::cos(xs[q])).epsilon(1e-12));

    std::mt19937_64 rng(5);
    const auto many = random_features(6, rng, -3.0, 3.0);
    const QuantumState m = angle_encode(many);
    for (int q = 0; q < 6; ++q)
        CHECK(std::abs(expval_z(m, q) - std::cos(many[q])) < 1e-12);
}

TEST_CASE("amplitude_state_jacobian fixed cases") {
    const auto j_unit = amplitude_state_jacobian({1, 0}, 1);
    CHECK(j_unit[0][0] == doctest::Approx(0.0));
    CHECK(j_unit[0][1] == doctest::Approx(0.0));
    CHECK(j_unit[1][0] == doctest::Approx(0.0));
    CHECK(j_unit[1][1] == doctest::Approx(1.0));

    const auto j = amplitude_state_jacobian({3, 4}, 1);
    CHECK(j[0][0] == doctest::Approx(16.0 / 125.0).epsilon(1e-12));
    CHECK(j[0][1] == doctest::Approx(-12.0 / 125.0).epsilon(1e-12));
    CHECK(j[1][0] == doctest::Approx(-12.0 / 125.0).epsilon(1e-12));
    CHECK(j[1][1] == doctest::Approx(9.0 / 125.0).epsilon(1e-12));

    CHECK_THROWS_AS(amplitude_state_jacobian({0, 0}, 1), EncodingError);
}

TEST_CASE("jacobian kills the radial direction and matches finite differences") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        std::uniform_real_distribution<double> scale(0.5, 10.0);
        auto v = random_features(6, rng);
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        const double want = scale(rng);
        for (auto& x : v) x *= want / std::sqrt(nrm);

        const auto j = amplitude_state_jacobian(v, 3);
        REQUIRE(j.size() == 8);
        REQUIRE(j[0].size() == 6);

        // J v = 0
        for (std::size_t i = 0; i < 8; ++i) {
            double dot = 0.0;
            for (std::size_t k = 0; k < 6; ++k) dot += j[i][k] * v[k];
            CHECK(std::abs(dot) < 1e-12);
        }
        // padding rows are zero
        for (std::size_t i = 6; i < 8; ++i)
            for (std::size_t k = 0; k < 6; ++k) CHECK(j[i][k] == 0.0);

        // central differences on the normalization map, h = 1e-6
        const double h = 1e-6;
        for (std::size_t k = 0; k < 6; ++k) {
            auto vp = v, vm = v;
            vp[k] += h;
            vm[k] -= h;
            const auto ap = padded_normalized(vp, 3);
            const auto am = padded_normalized(vm, 3);
            for (std::size_t i = 0; i < 6; ++i) {
                const double fd = (ap[i] - am[i]) / (2 * h);
                CHECK(std::abs(j[i][k] - fd) < 1e-6 * (1.0 + std::abs(fd)));
            }
        }
    }
}
