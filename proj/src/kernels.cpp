#include "qnet/kernels.hpp"

#include <cassert>
#include <algorithm>
#include <vector>

namespace qnet::kernels {

ExecConfig& exec_config() {
    static ExecConfig cfg;
    return cfg;
}

namespace {

// Qubit q of an n-qubit system lives at bit position n-1-q (qubit 0 is the
// most significant bit of a basis index).
inline int bit_pos(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

struct TargetTables {
    std::size_t dim;          // 2^n
    std::size_t gate_dim;     // 2^m
    std::size_t outer_count;  // 2^(n-m)
    std::vector<std::size_t> sub;    // sub-index -> scattered target bits
    std::vector<std::size_t> outer;  // outer index -> scattered free bits
};

TargetTables build_target_tables(int n_qubits, int m, const int* targets) {
    TargetTables t;
    t.dim = std::size_t{1} << n_qubits;
    t.gate_dim = std::size_t{1} << m;
    t.outer_count = std::size_t{1} << (n_qubits - m);

    bool is_target[64] = {};
    for (int i = 0; i < m; ++i) is_target[bit_pos(n_qubits, targets[i])] = true;

    t.sub.resize(t.gate_dim);
    for (std::size_t a = 0; a < t.gate_dim; ++a) {
        std::size_t s = 0;
        for (int i = 0; i < m; ++i) {
            // targets[0] is the most significant bit of the gate's sub-index
            if ((a >> (m - 1 - i)) & 1) s |= std::size_t{1} << bit_pos(n_qubits, targets[i]);
        }
        t.sub[a] = s;
    }

    t.outer.resize(t.outer_count);
    for (std::size_t o = 0; o < t.outer_count; ++o) {
        std::size_t full = 0;
        std::size_t rest = o;
        for (int pos = 0; pos < n_qubits; ++pos) {
            if (is_target[pos]) continue;
            if (rest & 1) full |= std::size_t{1} << pos;
            rest >>= 1;
        }
        t.outer[o] = full;
    }
    return t;
}

constexpr int kMaxTargetedQubits = 4;  // gates in the catalogue have arity <= 3

// One block of the targeted update: the 2^m x 2^m sub-matrix of rho selected
// by (base_r, base_c) is conjugated by the gate, accumulating in double.
template <class T>
inline void targeted_block(std::complex<T>* rho, const cdouble* gate, const TargetTables& t,
                           std::size_t base_r, std::size_t base_c) {
    const std::size_t dm = t.gate_dim;
    cdouble block[1 << kMaxTargetedQubits][1 << kMaxTargetedQubits];
    cdouble tmp[1 << kMaxTargetedQubits][1 << kMaxTargetedQubits];

    for (std::size_t a = 0; a < dm; ++a) {
        const std::size_t row = (base_r | t.sub[a]) * t.dim;
        for (std::size_t b = 0; b < dm; ++b)
            block[a][b] = cdouble(rho[row + (base_c | t.sub[b])]);
    }
    for (std::size_t a = 0; a < dm; ++a) {
        for (std::size_t b = 0; b < dm; ++b) {
            cdouble acc = 0.0;
            for (std::size_t x = 0; x < dm; ++x) acc += gate[a * dm + x] * block[x][b];
            tmp[a][b] = acc;
        }
    }
    for (std::size_t a = 0; a < dm; ++a) {
        const std::size_t row = (base_r | t.sub[a]) * t.dim;
        for (std::size_t b = 0; b < dm; ++b) {
            cdouble acc = 0.0;
            for (std::size_t y = 0; y < dm; ++y) acc += tmp[a][y] * std::conj(gate[b * dm + y]);
            rho[row + (base_c | t.sub[b])] = std::complex<T>(acc);
        }
    }
}

template <class T>
std::vector<cdouble>& dense_scratch() {
    thread_local std::vector<cdouble> scratch;
    return scratch;
}

}  // namespace

namespace serial {

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim) {
    std::fill_n(rho, dim * dim, std::complex<T>(0));
    rho[0] = std::complex<T>(1);
}

template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim) {
    auto& tmp = dense_scratch<T>();
    tmp.assign(dim * dim, cdouble(0));
    // tmp = U rho
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t k = 0; k < dim; ++k) {
            const cdouble f = u[i * dim + k];
            if (f == cdouble(0)) continue;
            const std::complex<T>* src = rho + k * dim;
            cdouble* dst = tmp.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) dst[j] += f * cdouble(src[j]);
        }
    }
    // rho = tmp U^dagger
    for (std::size_t i = 0; i < dim; ++i) {
        const cdouble* trow = tmp.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            const cdouble* urow = u + j * dim;
            cdouble acc = 0.0;
            for (std::size_t k = 0; k < dim; ++k) acc += trow[k] * std::conj(urow[k]);
            rho[i * dim + j] = std::complex<T>(acc);
        }
    }
}

template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate, int m,
                    const int* targets) {
    assert(m <= kMaxTargetedQubits);
    const TargetTables t = build_target_tables(n_qubits, m, targets);
    for (std::size_t r = 0; r < t.outer_count; ++r)
        for (std::size_t c = 0; c < t.outer_count; ++c)
            targeted_block(rho, gate, t, t.outer[r], t.outer[c]);
}

template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const int pos = bit_pos(n_qubits, qubit);
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        if (static_cast<int>((i >> pos) & 1) == outcome) acc += static_cast<double>(rho[i * dim + i].real());
    return acc;
}

template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const int pos = bit_pos(n_qubits, qubit);
    for (std::size_t i = 0; i < dim; ++i) {
        std::complex<T>* row = rho + i * dim;
        if (static_cast<int>((i >> pos) & 1) != outcome) {
            std::fill_n(row, dim, std::complex<T>(0));
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = (static_cast<int>((j >> pos) & 1) == outcome)
                         ? std::complex<T>(cdouble(row[j]) / norm)
                         : std::complex<T>(0);
    }
}

template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep, int k,
                   std::complex<T>* out) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const TargetTables t = build_target_tables(n_qubits, k, keep);
    // t.sub scatters kept-qubit indices, t.outer the traced-out environment
    for (std::size_t a = 0; a < t.gate_dim; ++a) {
        for (std::size_t b = 0; b < t.gate_dim; ++b) {
            cdouble acc = 0.0;
            for (std::size_t e = 0; e < t.outer_count; ++e)
                acc += cdouble(rho[(t.sub[a] | t.outer[e]) * dim + (t.sub[b] | t.outer[e])]);
            out[a * t.gate_dim + b] = std::complex<T>(acc);
        }
    }
}

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim) {
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += cdouble(rho[i * dim + i]);
    return acc;
}

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim) {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j)
            worst = std::max(worst,
                             std::abs(cdouble(rho[i * dim + j]) - std::conj(cdouble(rho[j * dim + i]))));
    return worst;
}

}  // namespace serial

namespace par {

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim) {
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        std::fill_n(rho + static_cast<std::size_t>(i) * dim, dim, std::complex<T>(0));
    rho[0] = std::complex<T>(1);
}

template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim) {
    auto& tmp = dense_scratch<T>();
    tmp.assign(dim * dim, cdouble(0));
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t k = 0; k < dim; ++k) {
            const cdouble f = u[i * dim + k];
            if (f == cdouble(0)) continue;
            const std::complex<T>* src = rho + k * dim;
            cdouble* dst = tmp.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) dst[j] += f * cdouble(src[j]);
        }
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const cdouble* trow = tmp.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            const cdouble* urow = u + j * dim;
            cdouble acc = 0.0;
            for (std::size_t k = 0; k < dim; ++k) acc += trow[k] * std::conj(urow[k]);
            rho[i * dim + j] = std::complex<T>(acc);
        }
    }
}

template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate, int m,
                    const int* targets) {
    assert(m <= kMaxTargetedQubits);
    const TargetTables t = build_target_tables(n_qubits, m, targets);
    const std::int64_t oc = static_cast<std::int64_t>(t.outer_count);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t r = 0; r < oc; ++r)
        for (std::int64_t c = 0; c < oc; ++c)
            targeted_block(rho, gate, t, t.outer[static_cast<std::size_t>(r)],
                           t.outer[static_cast<std::size_t>(c)]);
}

template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const int pos = bit_pos(n_qubits, qubit);
    const std::int64_t n = static_cast<std::int64_t>(dim);
    double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        if (static_cast<int>((ii >> pos) & 1) == outcome)
            acc += static_cast<double>(rho[ii * dim + ii].real());
    }
    return acc;
}

template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const int pos = bit_pos(n_qubits, qubit);
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        std::complex<T>* row = rho + i * dim;
        if (static_cast<int>((i >> pos) & 1) != outcome) {
            std::fill_n(row, dim, std::complex<T>(0));
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = (static_cast<int>((j >> pos) & 1) == outcome)
                         ? std::complex<T>(cdouble(row[j]) / norm)
                         : std::complex<T>(0);
    }
}

template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep, int k,
                   std::complex<T>* out) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const TargetTables t = build_target_tables(n_qubits, k, keep);
    const std::int64_t dk = static_cast<std::int64_t>(t.gate_dim);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t a = 0; a < dk; ++a) {
        for (std::int64_t b = 0; b < dk; ++b) {
            cdouble acc = 0.0;
            for (std::size_t e = 0; e < t.outer_count; ++e)
                acc += cdouble(rho[(t.sub[static_cast<std::size_t>(a)] | t.outer[e]) * dim +
                                   (t.sub[static_cast<std::size_t>(b)] | t.outer[e])]);
            out[static_cast<std::size_t>(a) * t.gate_dim + static_cast<std::size_t>(b)] =
                std::complex<T>(acc);
        }
    }
}

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim) {
    const std::int64_t n = static_cast<std::int64_t>(dim);
    double re = 0.0, im = 0.0;
#pragma omp parallel for reduction(+ : re, im) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        re += static_cast<double>(rho[ii * dim + ii].real());
        im += static_cast<double>(rho[ii * dim + ii].imag());
    }
    return {re, im};
}

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim) {
    const std::int64_t n = static_cast<std::int64_t>(dim);
    double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = i; j < dim; ++j)
            worst = std::max(worst,
                             std::abs(cdouble(rho[i * dim + j]) - std::conj(cdouble(rho[j * dim + i]))));
    }
    return worst;
}

}  // namespace par

namespace {

inline bool go_serial(std::size_t dim) {
    auto& cfg = exec_config();
    return cfg.force_serial.load(std::memory_order_relaxed) ||
           dim < cfg.parallel_min_dim.load(std::memory_order_relaxed);
}

// Diagonal-only reductions touch dim entries, not dim^2; thread startup
// dominates until well past the 12-qubit cap (measured with qnet_bench).
inline bool diagonal_op_serial(std::size_t dim) { return go_serial(dim) || dim < 4096; }

}  // namespace

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim) {
    go_serial(dim) ? serial::zero_state(rho, dim) : par::zero_state(rho, dim);
}

template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim) {
    go_serial(dim) ? serial::apply_dense(rho, u, dim) : par::apply_dense(rho, u, dim);
}

template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate, int m,
                    const int* targets) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    go_serial(dim) ? serial::apply_targeted(rho, n_qubits, gate, m, targets)
                   : par::apply_targeted(rho, n_qubits, gate, m, targets);
}

template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    return diagonal_op_serial(dim) ? serial::probability(rho, n_qubits, qubit, outcome)
                                   : par::probability(rho, n_qubits, qubit, outcome);
}

template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    go_serial(dim) ? serial::collapse(rho, n_qubits, qubit, outcome, norm)
                   : par::collapse(rho, n_qubits, qubit, outcome, norm);
}

template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep, int k,
                   std::complex<T>* out) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    // parallelism is over output entries; a small kept subsystem gives the
    // threads nothing to share
    const std::size_t out_entries = (std::size_t{1} << k) * (std::size_t{1} << k);
    (go_serial(dim) || out_entries < 64) ? serial::partial_trace(rho, n_qubits, keep, k, out)
                                         : par::partial_trace(rho, n_qubits, keep, k, out);
}

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim) {
    return diagonal_op_serial(dim) ? serial::trace(rho, dim) : par::trace(rho, dim);
}

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim) {
    return go_serial(dim) ? serial::hermiticity_deviation(rho, dim)
                          : par::hermiticity_deviation(rho, dim);
}

#define QNET_INSTANTIATE_KERNELS(NS, T)                                                        \
    template void NS zero_state<T>(std::complex<T>*, std::size_t);                             \
    template void NS apply_dense<T>(std::complex<T>*, const cdouble*, std::size_t);            \
    template void NS apply_targeted<T>(std::complex<T>*, int, const cdouble*, int,             \
                                       const int*);                                            \
    template double NS probability<T>(const std::complex<T>*, int, int, int);                  \
    template void NS collapse<T>(std::complex<T>*, int, int, int, double);                     \
    template void NS partial_trace<T>(const std::complex<T>*, int, const int*, int,            \
                                      std::complex<T>*);                                       \
    template cdouble NS trace<T>(const std::complex<T>*, std::size_t);                         \
    template double NS hermiticity_deviation<T>(const std::complex<T>*, std::size_t);

QNET_INSTANTIATE_KERNELS(serial::, float)
QNET_INSTANTIATE_KERNELS(serial::, double)
QNET_INSTANTIATE_KERNELS(par::, float)
QNET_INSTANTIATE_KERNELS(par::, double)
QNET_INSTANTIATE_KERNELS(, float)
QNET_INSTANTIATE_KERNELS(, double)

#undef QNET_INSTANTIATE_KERNELS

}  // namespace qnet::kernels
