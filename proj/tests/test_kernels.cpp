#include <doctest.h>

#include <vector>

#include "qnet/kernels.hpp"
#include "qnet/rng.hpp"
#include "support/oracles.hpp"

using namespace qnet;
namespace k = qnet::kernels;

namespace {

// random Hermitian trace-1 PSD matrix built as a mixture of random pure states
std::vector<cdouble> random_density(int n, Rng& rng) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cdouble> rho(dim * dim, cdouble(0));
    for (int mix = 0; mix < 3; ++mix) {
        std::vector<cdouble> v(dim);
        double norm = 0;
        for (auto& x : v) {
            x = {rng.normal(), rng.normal()};
            norm += std::norm(x);
        }
        norm = std::sqrt(norm);
        for (auto& x : v) x /= norm;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) rho[r * dim + c] += v[r] * std::conj(v[c]) / 3.0;
    }
    return rho;
}

oracle::Mat padded_oracle(const oracle::Mat& gate, int n, const std::vector<int>& targets) {
    // independent route: permutation-free only for ascending adjacent targets,
    // so build it entrywise: U[r][c] = gate[sub(r)][sub(c)] * [outer bits equal]
    const std::size_t d = std::size_t{1} << n;
    const int m = static_cast<int>(targets.size());
    const std::size_t gd = std::size_t{1} << m;
    oracle::Mat u(d * d, oracle::cd(0));
    auto sub_index = [&](std::size_t full) {
        std::size_t s = 0;
        for (int i = 0; i < m; ++i)
            s |= ((full >> (n - 1 - targets[static_cast<std::size_t>(i)])) & 1) << (m - 1 - i);
        return s;
    };
    auto outer_bits = [&](std::size_t full) {
        std::size_t o = full;
        for (int i = 0; i < m; ++i)
            o &= ~(std::size_t{1} << (n - 1 - targets[static_cast<std::size_t>(i)]));
        return o;
    };
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if (outer_bits(r) == outer_bits(c))
                u[r * d + c] = gate[sub_index(r) * gd + sub_index(c)];
    return u;
}

}  // namespace

TEST_CASE("targeted apply equals dense conjugation by the padded operator") {
    Rng rng(5);
    const oracle::Mat h = {M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};
    const oracle::Mat cnot = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
    const oracle::Mat tof = [] {
        oracle::Mat t = oracle::identity(8);
        t[6 * 8 + 6] = t[7 * 8 + 7] = 0;
        t[6 * 8 + 7] = t[7 * 8 + 6] = 1;
        return t;
    }();

    struct Case {
        oracle::Mat gate;
        std::vector<int> targets;
    };
    const int n = 4;
    const std::size_t dim = 16;
    for (const Case& c : {Case{h, {2}}, Case{cnot, {1, 3}}, Case{cnot, {3, 0}}, Case{tof, {2, 0, 3}}}) {
        auto rho = random_density(n, rng);
        auto expected = rho;
        const oracle::Mat u = padded_oracle(c.gate, n, c.targets);
        expected = oracle::mul(oracle::mul(u, expected), oracle::dagger(u));

        auto got = rho;
        k::serial::apply_targeted(got.data(), n, c.gate.data(), static_cast<int>(c.targets.size()),
                                  c.targets.data());
        CHECK(oracle::max_abs_diff(got, expected) < 1e-12);

        auto got_par = rho;
        k::par::apply_targeted(got_par.data(), n, c.gate.data(),
                               static_cast<int>(c.targets.size()), c.targets.data());
        CHECK(oracle::max_abs_diff(got_par, got) < 1e-12);

        auto got_dense = rho;
        k::serial::apply_dense(got_dense.data(), u.data(), dim);
        CHECK(oracle::max_abs_diff(got_dense, expected) < 1e-12);

        auto got_dense_par = rho;
        k::par::apply_dense(got_dense_par.data(), u.data(), dim);
        CHECK(oracle::max_abs_diff(got_dense_par, expected) < 1e-12);
    }
}

TEST_CASE("probability and collapse agree with the projector definition") {
    Rng rng(17);
    const int n = 3;
    const std::size_t dim = 8;
    auto rho = random_density(n, rng);

    for (int qubit = 0; qubit < n; ++qubit) {
        for (int outcome = 0; outcome < 2; ++outcome) {
            // oracle: p = tr[rho P], P diagonal projector
            double p_expected = 0;
            for (std::size_t i = 0; i < dim; ++i)
                if (static_cast<int>((i >> (n - 1 - qubit)) & 1) == outcome)
                    p_expected += rho[i * dim + i].real();
            CHECK(k::serial::probability(rho.data(), n, qubit, outcome) ==
                  doctest::Approx(p_expected).epsilon(1e-12));
            CHECK(k::par::probability(rho.data(), n, qubit, outcome) ==
                  doctest::Approx(p_expected).epsilon(1e-12));
        }
    }

    const double p1 = k::serial::probability(rho.data(), n, 1, 1);
    auto collapsed = rho;
    k::serial::collapse(collapsed.data(), n, 1, 1, p1);
    // oracle: P rho P / p entrywise
    oracle::Mat expected(dim * dim, oracle::cd(0));
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            if (((r >> 1) & 1) && ((c >> 1) & 1)) expected[r * dim + c] = rho[r * dim + c] / p1;
    CHECK(oracle::max_abs_diff(collapsed, expected) < 1e-12);

    auto collapsed_par = rho;
    k::par::collapse(collapsed_par.data(), n, 1, 1, p1);
    CHECK(oracle::max_abs_diff(collapsed_par, collapsed) == 0.0);

    // zeroing is exact: every discarded entry is identically zero
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            if (!(((r >> 1) & 1) && ((c >> 1) & 1))) {
                CHECK(collapsed[r * dim + c].real() == 0.0);
                CHECK(collapsed[r * dim + c].imag() == 0.0);
            }
}

TEST_CASE("partial trace matches the projector-sum oracle") {
    Rng rng(23);
    for (int n = 2; n <= 4; ++n) {
        auto rho = random_density(n, rng);
        std::vector<std::vector<int>> keeps = {{0}, {n - 1}, {0, n - 1}};
        for (const auto& keep : keeps) {
            const std::size_t dk = std::size_t{1} << keep.size();
            std::vector<cdouble> got(dk * dk);
            k::serial::partial_trace(rho.data(), n, keep.data(), static_cast<int>(keep.size()),
                                     got.data());
            const oracle::Mat expected = oracle::partial_trace_projectors(rho, n, keep);
            CHECK(oracle::max_abs_diff(got, expected) < 1e-12);

            std::vector<cdouble> got_par(dk * dk);
            k::par::partial_trace(rho.data(), n, keep.data(), static_cast<int>(keep.size()),
                                  got_par.data());
            CHECK(oracle::max_abs_diff(got_par, expected) < 1e-12);
        }
    }
}

TEST_CASE("serial and parallel kernels agree on float data") {
    Rng rng(31);
    const int n = 5;
    const std::size_t dim = 32;
    auto rho_d = random_density(n, rng);
    std::vector<cfloat> a(dim * dim), b(dim * dim);
    for (std::size_t i = 0; i < rho_d.size(); ++i) a[i] = b[i] = cfloat(rho_d[i]);

    const oracle::Mat h = {M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};
    const int t[] = {3};
    k::serial::apply_targeted(a.data(), n, h.data(), 1, t);
    k::par::apply_targeted(b.data(), n, h.data(), 1, t);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i].real() - b[i].real()) < 1e-6f);
        CHECK(std::abs(a[i].imag() - b[i].imag()) < 1e-6f);
    }
    CHECK(std::abs(k::serial::trace(a.data(), dim) - cdouble(1)) < 1e-5);
    CHECK(k::serial::hermiticity_deviation(a.data(), dim) < 1e-5);
}

TEST_CASE("trace and hermiticity deviation") {
    Rng rng(37);
    auto rho = random_density(3, rng);
    CHECK(std::abs(k::serial::trace(rho.data(), 8) - cdouble(1)) < 1e-12);
    CHECK(std::abs(k::par::trace(rho.data(), 8) - cdouble(1)) < 1e-12);
    CHECK(k::serial::hermiticity_deviation(rho.data(), 8) < 1e-12);

    rho[3] += cdouble(0, 0.25);  // break hermiticity on purpose
    CHECK(k::serial::hermiticity_deviation(rho.data(), 8) >= 0.25 - 1e-12);
    CHECK(k::par::hermiticity_deviation(rho.data(), 8) ==
          doctest::Approx(k::serial::hermiticity_deviation(rho.data(), 8)));
}

TEST_CASE("zero state") {
    std::vector<cdouble> rho(16, cdouble(0.5, 0.5));
    k::serial::zero_state(rho.data(), 4);
    CHECK(rho[0] == cdouble(1));
    for (std::size_t i = 1; i < rho.size(); ++i) CHECK(rho[i] == cdouble(0));
    std::vector<cdouble> rho2(16, cdouble(0.5, 0.5));
    k::par::zero_state(rho2.data(), 4);
    CHECK(rho2 == rho);
}
