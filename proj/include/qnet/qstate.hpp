#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "qnet/rng.hpp"
#include "qnet/types.hpp"

namespace qnet {

class EnsembleStore;

struct MeasurementOutcome {
    int bit = 0;
    double probability = 0.0;  // branch probability before collapse
};

/// Lightweight handle naming one qubit inside a shared ensemble. Never owns
/// state; dereferencing resolves to exactly one system of one EnsembleStore.
struct QubitRef {
    EnsembleStore* stream = nullptr;
    std::uint32_t system = 0;
    std::uint16_t qubit = 0;

    bool operator==(const QubitRef&) const = default;
};

struct ValidationConfig {
    std::atomic<bool> check_unitarity{false};
};

ValidationConfig& validation_config();

namespace detail {
struct StateBlock;
std::shared_ptr<StateBlock> make_block(std::size_t bytes, Precision prec);
std::byte* block_data(StateBlock& block);
}  // namespace detail

/// Density matrix of one N-qubit system. Copies alias the same storage (view
/// semantics); use clone() for a deep copy. Basis ordering: qubit 0 is the
/// most significant bit, so |q0 q1 ... q_{N-1}> has basis index equal to the
/// binary number q0 q1 ... q_{N-1}.
class DensityState {
public:
    DensityState() = default;

    /// |0...0><0...0| on a freshly allocated block.
    static DensityState zero_state(int n_qubits, Precision prec = Precision::Double,
                                   int max_qubits = kDefaultMaxQubits);

    /// rho = |psi><psi| from an amplitude vector of length 2^N.
    static DensityState from_pure(std::span<const cdouble> amplitudes,
                                  Precision prec = Precision::Double);

    /// Test-fixture constructor from a row-major 2^N x 2^N matrix.
    static DensityState from_matrix(std::span<const cdouble> matrix, int n_qubits,
                                    Precision prec = Precision::Double);

    bool valid() const { return data_ != nullptr; }
    int n_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    Precision precision() const { return prec_; }
    double tolerance() const { return tolerance_for(prec_); }
    std::size_t payload_bytes() const { return dim() * dim() * entry_bytes(prec_); }

    /// rho <- U rho U^dagger with a dense 2^N x 2^N matrix (row-major).
    void apply_unitary(std::span<const cdouble> u);

    /// rho <- U rho U^dagger where U is a small gate on `targets` padded with
    /// identity everywhere else.
    void apply_targeted_unitary(std::span<const cdouble> gate, std::span<const int> targets);

    MeasurementOutcome measure_qubit(int qubit, Rng& rng);

    /// tr[rho (|outcome><outcome|)_qubit]
    double probability_of(int qubit, int outcome) const;

    /// Reduced state over `keep` (strictly ascending qubit indices).
    DensityState partial_trace(std::span<const int> keep) const;

    cdouble trace() const;
    double hermiticity_deviation() const;
    cdouble entry(std::size_t row, std::size_t col) const;
    double max_abs_diff(const DensityState& other) const;

    DensityState clone() const;
    void copy_from(const DensityState& other);

    /// Debug dump: {"n_qubits":N,"precision":"double","matrix":[[re,im],...]}.
    std::string dump_json() const;

private:
    friend class EnsembleStore;

    DensityState(std::shared_ptr<detail::StateBlock> block, void* data, int n, Precision prec)
        : block_(std::move(block)), data_(data), n_(n), prec_(prec) {}

    template <class F>
    decltype(auto) with_data(F&& f);
    template <class F>
    decltype(auto) with_data(F&& f) const;

    std::shared_ptr<detail::StateBlock> block_;
    void* data_ = nullptr;
    int n_ = 0;
    Precision prec_ = Precision::Double;
};

/// Spec-level constructor name.
DensityState new_system(int n_qubits, Precision prec = Precision::Double,
                        int max_qubits = kDefaultMaxQubits);

}  // namespace qnet
