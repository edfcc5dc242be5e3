// Serial vs OpenMP kernel timing for the state-vector primitives.
//
//   bench_kernels [n_qubits] [reps]
//
// Applies a fixed RY to every qubit plus a CNOT ring and <Z_0>, once with the
// serial reference kernels and once with the OpenMP ones, and reports the
// wall-clock ratio. Also checks the two paths agree bitwise-close.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "qrecover/statesim.hpp"

using namespace qrecover;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

struct PassResult {
    double seconds;
    double z0;
};

template <typename Apply1Q, typename ApplyCnot, typename ExpZ>
PassResult run_pass(int n, int reps, Apply1Q a1, ApplyCnot ac, ExpZ ez) {
    QuantumState psi = new_zero_state(n);
    const std::uint64_t dim = psi.dim();
    const Gate1Q ry = make_rotation(RotKind::RY, {0.731});
    const auto t0 = clk::now();
    double z = 0.0;
    for (int r = 0; r < reps; ++r) {
        for (int q = 0; q < n; ++q) a1(psi.amps.data(), dim, qubit_stride(n, q), ry);
        for (int q = 0; q < n; ++q) {
            const int t = (q + 1) % n;
            ac(psi.amps.data(), dim, qubit_stride(n, q), qubit_stride(n, t));
        }
        z = ez(psi.amps.data(), dim, qubit_stride(n, 0));
    }
    return {seconds_since(t0), z};
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 20;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    if (n < 2 || n > kMaxQubits) {
        std::fprintf(stderr, "n_qubits must be in [2, %d]\n", kMaxQubits);
        return 2;
    }

    const PassResult serial =
        run_pass(n, reps, kernels::apply_1q_serial, kernels::apply_cnot_serial,
                 kernels::expval_z_serial);
    const PassResult omp = run_pass(n, reps, kernels::apply_1q_omp, kernels::apply_cnot_omp,
                                    kernels::expval_z_omp);

    std::printf("n_qubits=%d reps=%d dim=%llu\n", n, reps,
                static_cast<unsigned long long>(std::uint64_t{1} << n));
    std::printf("serial  %.4fs  <Z0>=% .12f\n", serial.seconds, serial.z0);
    std::printf("openmp  %.4fs  <Z0>=% .12f\n", omp.seconds, omp.z0);
    std::printf("speedup %.2fx\n", serial.seconds / omp.seconds);

    if (std::abs(serial.z0 - omp.z0) > 1e-10) {
        std::fprintf(stderr, "MISMATCH: serial and openmp expectation values differ\n");
        return 1;
    }
    return 0;
}
