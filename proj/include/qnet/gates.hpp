#pragma once

#include <atomic>
#include <functional>
#include <list>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qnet/matrix.hpp"
#include "qnet/qstate.hpp"
#include "qnet/types.hpp"

namespace qnet {

enum class Gate { H, X, Y, Z, RX, RY, RZ, Phase, CNOT, CPhase, CU, Swap, Toffoli };

const char* gate_name(Gate g);

/// A gate from the catalogue plus its parameters. Rotation and phase gates
/// take one angle in radians; CU carries an arbitrary 2x2 unitary.
struct GateSpec {
    Gate gate = Gate::H;
    std::vector<double> params;
    std::optional<Unitary> custom;

    static GateSpec h() { return {Gate::H, {}, {}}; }
    static GateSpec x() { return {Gate::X, {}, {}}; }
    static GateSpec y() { return {Gate::Y, {}, {}}; }
    static GateSpec z() { return {Gate::Z, {}, {}}; }
    static GateSpec rx(double theta) { return {Gate::RX, {theta}, {}}; }
    static GateSpec ry(double theta) { return {Gate::RY, {theta}, {}}; }
    static GateSpec rz(double theta) { return {Gate::RZ, {theta}, {}}; }
    static GateSpec phase(double phi) { return {Gate::Phase, {phi}, {}}; }
    static GateSpec cnot() { return {Gate::CNOT, {}, {}}; }
    static GateSpec cphase(double phi) { return {Gate::CPhase, {phi}, {}}; }
    static GateSpec cu(Unitary u) { return {Gate::CU, {}, std::move(u)}; }
    static GateSpec swap_gate() { return {Gate::Swap, {}, {}}; }
    static GateSpec toffoli() { return {Gate::Toffoli, {}, {}}; }

    int arity() const;
    void validate() const;
};

/// Base matrix of the gate on its own qubits (2^arity x 2^arity).
Unitary gate_matrix(const GateSpec& spec);

/// Cache of expanded N-qubit operators keyed by gate, quantized parameters,
/// target tuple and system size. Concurrent readers are fine; duplicate
/// concurrent builds of one entry produce identical values (last write wins).
class OperatorCache {
public:
    explicit OperatorCache(std::size_t capacity = 0);  // 0 = unbounded

    std::shared_ptr<const Unitary> get_or_build(const std::string& key,
                                                const std::function<Unitary()>& build);
    std::size_t size() const;
    void clear();
    std::size_t capacity() const { return capacity_; }

private:
    void evict_if_needed();

    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<const Unitary>> map_;
    std::list<std::string> order_;  // insertion order, used only when bounded
    std::size_t capacity_;
};

std::string operator_cache_key(const GateSpec& spec, std::span<const int> targets, int n_qubits);

/// Identity-padded 2^N x 2^N operator for the gate on `targets`. Projector
/// decompositions handle arbitrary target order; SWAP is composed from three
/// CNOT expansions.
std::shared_ptr<const Unitary> expand_operator(const GateSpec& spec, std::span<const int> targets,
                                               int n_qubits, OperatorCache* cache);

/// How apply_gate routes state updates. The targeted in-place kernel is the
/// default; the expanded route goes through expand_operator + a dense
/// multiply and is kept as the cross-checkable reference path.
struct GateContext {
    OperatorCache cache;
    std::atomic<bool> use_expanded{false};
    std::atomic<bool> cache_enabled{true};
};

GateContext& default_gate_context();

void apply_gate(GateContext& ctx, const GateSpec& spec, DensityState& state,
                std::span<const int> targets);
void apply_gate(GateContext& ctx, const GateSpec& spec, std::span<const QubitRef> qubits);

inline void apply_gate(const GateSpec& spec, DensityState& state, std::span<const int> targets) {
    apply_gate(default_gate_context(), spec, state, targets);
}
inline void apply_gate(const GateSpec& spec, std::span<const QubitRef> qubits) {
    apply_gate(default_gate_context(), spec, qubits);
}

struct CircuitStep {
    GateSpec spec;
    std::vector<int> targets;
};
using Circuit = std::vector<CircuitStep>;

/// Applies `circuit`, rewriting each step's logical indices through `mapping`.
void apply_circuit(GateContext& ctx, const Circuit& circuit, DensityState& state,
                   std::span<const int> mapping);

/// H / controlled-phase cascade over n qubits with phi_m = 2*pi/2^m. Outputs
/// are in bit-reversed order relative to the plain DFT (no terminal swaps).
Circuit qft_circuit(int n);

void build_qft(DensityState& state, std::span<const int> qubits);
void build_qft(std::span<const QubitRef> qubits);

// Gate helpers mirroring the catalogue; the QubitRef forms require all refs
// to live in one system.

// clang-format off
inline void H(DensityState& s, int q) { const int t[] = {q}; apply_gate(GateSpec::h(), s, t); }
inline void X(DensityState& s, int q) { const int t[] = {q}; apply_gate(GateSpec::x(), s, t); }
inline void Y(DensityState& s, int q) { const int t[] = {q}; apply_gate(GateSpec::y(), s, t); }
inline void Z(DensityState& s, int q) { const int t[] = {q}; apply_gate(GateSpec::z(), s, t); }
inline void RX(DensityState& s, int q, double a) { const int t[] = {q}; apply_gate(GateSpec::rx(a), s, t); }
inline void RY(DensityState& s, int q, double a) { const int t[] = {q}; apply_gate(GateSpec::ry(a), s, t); }
inline void RZ(DensityState& s, int q, double a) { const int t[] = {q}; apply_gate(GateSpec::rz(a), s, t); }
inline void PHASE(DensityState& s, int q, double a) { const int t[] = {q}; apply_gate(GateSpec::phase(a), s, t); }
inline void CNOT(DensityState& s, int c, int tq) { const int t[] = {c, tq}; apply_gate(GateSpec::cnot(), s, t); }
inline void CPHASE(DensityState& s, int c, int tq, double a) { const int t[] = {c, tq}; apply_gate(GateSpec::cphase(a), s, t); }
inline void CU(DensityState& s, int c, int tq, Unitary u) { const int t[] = {c, tq}; apply_gate(GateSpec::cu(std::move(u)), s, t); }
inline void SWAP(DensityState& s, int a, int b) { const int t[] = {a, b}; apply_gate(GateSpec::swap_gate(), s, t); }
inline void TOFFOLI(DensityState& s, int c1, int c2, int tq) { const int t[] = {c1, c2, tq}; apply_gate(GateSpec::toffoli(), s, t); }

inline void H(QubitRef q) { const QubitRef t[] = {q}; apply_gate(GateSpec::h(), t); }
inline void X(QubitRef q) { const QubitRef t[] = {q}; apply_gate(GateSpec::x(), t); }
inline void Y(QubitRef q) { const QubitRef t[] = {q}; apply_gate(GateSpec::y(), t); }
inline void Z(QubitRef q) { const QubitRef t[] = {q}; apply_gate(GateSpec::z(), t); }
inline void RX(QubitRef q, double a) { const QubitRef t[] = {q}; apply_gate(GateSpec::rx(a), t); }
inline void RY(QubitRef q, double a) { const QubitRef t[] = {q}; apply_gate(GateSpec::ry(a), t); }
inline void RZ(QubitRef q, double a) { const QubitRef t[] = {q}; apply_gate(GateSpec::rz(a), t); }
inline void PHASE(QubitRef q, double a) { const QubitRef t[] = {q}; apply_gate(GateSpec::phase(a), t); }
inline void CNOT(QubitRef c, QubitRef tq) { const QubitRef t[] = {c, tq}; apply_gate(GateSpec::cnot(), t); }
inline void CPHASE(QubitRef c, QubitRef tq, double a) { const QubitRef t[] = {c, tq}; apply_gate(GateSpec::cphase(a), t); }
inline void CU(QubitRef c, QubitRef tq, Unitary u) { const QubitRef t[] = {c, tq}; apply_gate(GateSpec::cu(std::move(u)), t); }
inline void SWAP(QubitRef a, QubitRef b) { const QubitRef t[] = {a, b}; apply_gate(GateSpec::swap_gate(), t); }
inline void TOFFOLI(QubitRef c1, QubitRef c2, QubitRef tq) { const QubitRef t[] = {c1, c2, tq}; apply_gate(GateSpec::toffoli(), t); }
// clang-format on

}  // namespace qnet
