#include "qnet/qstate.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <sstream>
#include <vector>

#include "qnet/kernels.hpp"
#include "qnet/matrix.hpp"

namespace qnet {

ValidationConfig& validation_config() {
    static ValidationConfig cfg;
    return cfg;
}

namespace detail {

/// Owning storage for one or more system states, 64-byte aligned. The
/// payload size is exactly the closed-form entry count times the component
/// width; no rounding or per-system padding.
struct StateBlock {
    StateBlock(std::size_t size_bytes, Precision prec)
        : bytes(size_bytes),
          precision(prec),
          data(static_cast<std::byte*>(::operator new(size_bytes, std::align_val_t{64}))) {}

    ~StateBlock() { ::operator delete(data, std::align_val_t{64}); }

    StateBlock(const StateBlock&) = delete;
    StateBlock& operator=(const StateBlock&) = delete;

    std::size_t bytes;
    Precision precision;
    std::byte* data;
};

std::shared_ptr<StateBlock> make_block(std::size_t bytes, Precision prec) {
    try {
        return std::make_shared<StateBlock>(bytes, prec);
    } catch (const std::bad_alloc&) {
        throw ResourceError("allocation of " + std::to_string(bytes) + " bytes failed");
    }
}

std::byte* block_data(StateBlock& block) { return block.data; }

}  // namespace detail

template <class F>
decltype(auto) DensityState::with_data(F&& f) {
    if (prec_ == Precision::Double) return f(static_cast<cdouble*>(data_));
    return f(static_cast<cfloat*>(data_));
}

template <class F>
decltype(auto) DensityState::with_data(F&& f) const {
    if (prec_ == Precision::Double) return f(static_cast<const cdouble*>(data_));
    return f(static_cast<const cfloat*>(data_));
}

DensityState DensityState::zero_state(int n_qubits, Precision prec, int max_qubits) {
    if (n_qubits < 1 || n_qubits > max_qubits)
        throw SizeError("system size " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(max_qubits) + "]");
    const std::size_t dim = std::size_t{1} << n_qubits;
    auto block = detail::make_block(dim * dim * entry_bytes(prec), prec);
    DensityState s(block, block->data, n_qubits, prec);
    s.with_data([dim](auto* p) { kernels::zero_state(p, dim); });
    return s;
}

DensityState new_system(int n_qubits, Precision prec, int max_qubits) {
    return DensityState::zero_state(n_qubits, prec, max_qubits);
}

DensityState DensityState::from_pure(std::span<const cdouble> amplitudes, Precision prec) {
    int n = 0;
    while ((std::size_t{1} << n) < amplitudes.size()) ++n;
    if ((std::size_t{1} << n) != amplitudes.size() || amplitudes.empty())
        throw ShapeError("amplitude vector length must be a power of two");
    DensityState s = zero_state(std::max(n, 1), prec);
    const std::size_t dim = s.dim();
    s.with_data([&](auto* p) {
        using C = std::remove_reference_t<decltype(p[0])>;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c)
                p[r * dim + c] = C(amplitudes[r] * std::conj(amplitudes[c]));
    });
    return s;
}

DensityState DensityState::from_matrix(std::span<const cdouble> matrix, int n_qubits,
                                       Precision prec) {
    DensityState s = zero_state(n_qubits, prec);
    const std::size_t dim = s.dim();
    if (matrix.size() != dim * dim) throw ShapeError("matrix size does not match qubit count");
    s.with_data([&](auto* p) {
        using C = std::remove_reference_t<decltype(p[0])>;
        for (std::size_t i = 0; i < dim * dim; ++i) p[i] = C(matrix[i]);
    });
    return s;
}

void DensityState::apply_unitary(std::span<const cdouble> u) {
    const std::size_t d = dim();
    if (u.size() != d * d) throw ShapeError("operator dimension does not match system");
    if (validation_config().check_unitarity.load(std::memory_order_relaxed)) {
        Unitary check(d);
        check.m.assign(u.begin(), u.end());
        if (max_unitarity_deviation(check) > tolerance())
            throw NumericalError("operator is not unitary within tolerance");
    }
    with_data([&](auto* p) { kernels::apply_dense(p, u.data(), d); });
}

void DensityState::apply_targeted_unitary(std::span<const cdouble> gate,
                                          std::span<const int> targets) {
    const int m = static_cast<int>(targets.size());
    if (m < 1 || m > 4) throw ShapeError("targeted apply supports 1..4 qubits");
    const std::size_t gd = std::size_t{1} << m;
    if (gate.size() != gd * gd) throw ShapeError("gate dimension does not match target count");
    for (int i = 0; i < m; ++i) {
        if (targets[i] < 0 || targets[i] >= n_)
            throw IndexError("gate target out of range");
        for (int j = i + 1; j < m; ++j)
            if (targets[i] == targets[j]) throw IndexError("duplicate gate target");
    }
    with_data([&](auto* p) { kernels::apply_targeted(p, n_, gate.data(), m, targets.data()); });
}

double DensityState::probability_of(int qubit, int outcome) const {
    if (qubit < 0 || qubit >= n_) throw IndexError("qubit index out of range");
    return with_data([&](const auto* p) { return kernels::probability(p, n_, qubit, outcome); });
}

MeasurementOutcome DensityState::measure_qubit(int qubit, Rng& rng) {
    if (qubit < 0 || qubit >= n_) throw IndexError("qubit index out of range");
    const double p0 = probability_of(qubit, 0);
    const double p1 = probability_of(qubit, 1);
    if (std::max(p0, p1) < kCorruptStateThreshold)
        throw NumericalError("corrupt state: no outcome carries probability mass");

    // Exact-zero branches first so that repeated measurement of a collapsed
    // qubit can never flip, independent of rounding in the surviving branch.
    int bit;
    if (p1 == 0.0)
        bit = 0;
    else if (p0 == 0.0)
        bit = 1;
    else
        bit = rng.uniform01() < p1 / (p0 + p1) ? 1 : 0;

    const double p = bit ? p1 : p0;
    with_data([&](auto* ptr) { kernels::collapse(ptr, n_, qubit, bit, p); });
    return {bit, p};
}

DensityState DensityState::partial_trace(std::span<const int> keep) const {
    if (keep.empty()) throw IndexError("keep set must be nonempty");
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] < 0 || keep[i] >= n_) throw IndexError("keep index out of range");
        if (i > 0 && keep[i] <= keep[i - 1])
            throw IndexError("keep indices must be strictly ascending");
    }
    const int k = static_cast<int>(keep.size());
    DensityState out = zero_state(k, prec_);
    if (prec_ == Precision::Double)
        kernels::partial_trace(static_cast<const cdouble*>(data_), n_, keep.data(), k,
                               static_cast<cdouble*>(out.data_));
    else
        kernels::partial_trace(static_cast<const cfloat*>(data_), n_, keep.data(), k,
                               static_cast<cfloat*>(out.data_));
    return out;
}

cdouble DensityState::trace() const {
    return with_data([&](const auto* p) { return kernels::trace(p, dim()); });
}

double DensityState::hermiticity_deviation() const {
    return with_data([&](const auto* p) { return kernels::hermiticity_deviation(p, dim()); });
}

cdouble DensityState::entry(std::size_t row, std::size_t col) const {
    const std::size_t d = dim();
    if (row >= d || col >= d) throw IndexError("matrix entry out of range");
    return with_data([&](const auto* p) { return cdouble(p[row * d + col]); });
}

double DensityState::max_abs_diff(const DensityState& other) const {
    if (other.n_ != n_) throw ShapeError("dimension mismatch");
    const std::size_t d = dim();
    double worst = 0.0;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            worst = std::max(worst, std::abs(entry(r, c) - other.entry(r, c)));
    return worst;
}

DensityState DensityState::clone() const {
    auto block = detail::make_block(payload_bytes(), prec_);
    DensityState s(block, block->data, n_, prec_);
    std::memcpy(s.data_, data_, payload_bytes());
    return s;
}

void DensityState::copy_from(const DensityState& other) {
    if (other.n_ != n_ || other.prec_ != prec_) throw ShapeError("state layout mismatch");
    std::memcpy(data_, other.data_, payload_bytes());
}

std::string DensityState::dump_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"n_qubits\":" << n_ << ",\"precision\":\"" << precision_name(prec_)
       << "\",\"matrix\":[";
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d * d; ++i) {
        const cdouble v = entry(i / d, i % d);
        os << (i ? "," : "") << '[' << v.real() << ',' << v.imag() << ']';
    }
    os << "]}";
    return os.str();
}

}  // namespace qnet
