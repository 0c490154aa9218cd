// Serial vs OpenMP kernel comparison across system sizes. The dispatching
// front-ends in the library pick between these two paths at run time; this
// target quantifies the crossover on the build machine.

#include <benchmark/benchmark.h>

#include <vector>

#include "qnet/kernels.hpp"
#include "qnet/rng.hpp"

using namespace qnet;
namespace k = qnet::kernels;

namespace {

std::vector<cdouble> make_state(int n, Rng& rng) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cdouble> rho(dim * dim);
    // Haar-ish filler; the kernels do not care whether it is a valid state
    for (auto& v : rho) v = {rng.normal(), rng.normal()};
    return rho;
}

const cdouble kHadamard[] = {M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};
const cdouble kCnot[] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};

std::vector<cdouble> dense_operator(int n) {
    // identity-padded Hadamard on qubit 0, materialized as a dense matrix
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cdouble> u(dim * dim, cdouble(0));
    const std::size_t half = dim / 2;
    for (std::size_t i = 0; i < half; ++i) {
        u[i * dim + i] = M_SQRT1_2;
        u[i * dim + i + half] = M_SQRT1_2;
        u[(i + half) * dim + i] = M_SQRT1_2;
        u[(i + half) * dim + i + half] = -M_SQRT1_2;
    }
    return u;
}

void items_per_gate(benchmark::State& state, int n) {
    const double entries = static_cast<double>((std::size_t{1} << n) * (std::size_t{1} << n));
    state.SetItemsProcessed(static_cast<std::int64_t>(entries * state.iterations()));
}

}  // namespace

static void bm_targeted_1q_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    auto rho = make_state(n, rng);
    const int targets[] = {n / 2};
    for (auto _ : state) {
        k::serial::apply_targeted(rho.data(), n, kHadamard, 1, targets);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_targeted_1q_serial)->DenseRange(4, 10);

static void bm_targeted_1q_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    auto rho = make_state(n, rng);
    const int targets[] = {n / 2};
    for (auto _ : state) {
        k::par::apply_targeted(rho.data(), n, kHadamard, 1, targets);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_targeted_1q_omp)->DenseRange(4, 10);

static void bm_targeted_2q_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    auto rho = make_state(n, rng);
    const int targets[] = {0, n - 1};
    for (auto _ : state) {
        k::serial::apply_targeted(rho.data(), n, kCnot, 2, targets);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_targeted_2q_serial)->DenseRange(4, 10);

static void bm_targeted_2q_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    auto rho = make_state(n, rng);
    const int targets[] = {0, n - 1};
    for (auto _ : state) {
        k::par::apply_targeted(rho.data(), n, kCnot, 2, targets);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_targeted_2q_omp)->DenseRange(4, 10);

static void bm_dense_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(3);
    auto rho = make_state(n, rng);
    const auto u = dense_operator(n);
    for (auto _ : state) {
        k::serial::apply_dense(rho.data(), u.data(), std::size_t{1} << n);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_dense_serial)->DenseRange(4, 9);

static void bm_dense_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(3);
    auto rho = make_state(n, rng);
    const auto u = dense_operator(n);
    for (auto _ : state) {
        k::par::apply_dense(rho.data(), u.data(), std::size_t{1} << n);
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_dense_omp)->DenseRange(4, 9);

static void bm_probability_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(4);
    auto rho = make_state(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::probability(rho.data(), n, 0, 1));
    items_per_gate(state, n);
}
BENCHMARK(bm_probability_serial)->DenseRange(6, 10);

static void bm_probability_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(4);
    auto rho = make_state(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(k::par::probability(rho.data(), n, 0, 1));
    items_per_gate(state, n);
}
BENCHMARK(bm_probability_omp)->DenseRange(6, 10);

static void bm_partial_trace_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(5);
    auto rho = make_state(n, rng);
    const int keep[] = {0, 1};
    std::vector<cdouble> out(16);
    for (auto _ : state) {
        k::serial::partial_trace(rho.data(), n, keep, 2, out.data());
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_partial_trace_serial)->DenseRange(6, 10);

static void bm_partial_trace_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(5);
    auto rho = make_state(n, rng);
    const int keep[] = {0, 1};
    std::vector<cdouble> out(16);
    for (auto _ : state) {
        k::par::partial_trace(rho.data(), n, keep, 2, out.data());
        benchmark::ClobberMemory();
    }
    items_per_gate(state, n);
}
BENCHMARK(bm_partial_trace_omp)->DenseRange(6, 10);

BENCHMARK_MAIN();
