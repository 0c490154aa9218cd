#include "qnet/gates.hpp"

#include <cmath>
#include <sstream>

#include "qnet/qstream.hpp"

namespace qnet {

namespace {

constexpr cdouble kI{0.0, 1.0};

Unitary mat2(cdouble a, cdouble b, cdouble c, cdouble d) {
    Unitary u(2);
    u.m = {a, b, c, d};
    return u;
}

const Unitary& pauli_x() {
    static const Unitary u = mat2(0, 1, 1, 0);
    return u;
}
const Unitary& proj0() {
    static const Unitary u = mat2(1, 0, 0, 0);
    return u;
}
const Unitary& proj1() {
    static const Unitary u = mat2(0, 0, 0, 1);
    return u;
}

Unitary cnot4() {
    Unitary u(4);
    u.m = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
    return u;
}

Unitary cnot4_flipped() {  // control = low sub-bit
    Unitary u(4);
    u.m = {1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0};
    return u;
}

/// Controlled single-qubit block matrix |0><0| (x) I + |1><1| (x) g.
Unitary controlled2(const Unitary& g) {
    Unitary u = identity_matrix(4);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) u.at(2 + r, 2 + c) = g.at(r, c);
    return u;
}

/// Kronecker chain over all n qubits: factor f_q at qubit q, identity where
/// no factor is given. Entry (r, c) is the product of per-qubit elements.
Unitary kron_chain(int n, const std::vector<const Unitary*>& factors) {
    const std::size_t dim = std::size_t{1} << n;
    Unitary out(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            cdouble prod = 1.0;
            for (int q = 0; q < n && prod != cdouble(0); ++q) {
                const int br = static_cast<int>((r >> (n - 1 - q)) & 1);
                const int bc = static_cast<int>((c >> (n - 1 - q)) & 1);
                if (const Unitary* f = factors[static_cast<std::size_t>(q)])
                    prod *= f->at(static_cast<std::size_t>(br), static_cast<std::size_t>(bc));
                else if (br != bc)
                    prod = 0.0;
            }
            out.at(r, c) = prod;
        }
    }
    return out;
}

void add_into(Unitary& acc, const Unitary& other) {
    for (std::size_t i = 0; i < acc.m.size(); ++i) acc.m[i] += other.m[i];
}

}  // namespace

const char* gate_name(Gate g) {
    switch (g) {
        case Gate::H: return "H";
        case Gate::X: return "X";
        case Gate::Y: return "Y";
        case Gate::Z: return "Z";
        case Gate::RX: return "RX";
        case Gate::RY: return "RY";
        case Gate::RZ: return "RZ";
        case Gate::Phase: return "PHASE";
        case Gate::CNOT: return "CNOT";
        case Gate::CPhase: return "CPHASE";
        case Gate::CU: return "CU";
        case Gate::Swap: return "SWAP";
        case Gate::Toffoli: return "TOFFOLI";
    }
    return "?";
}

int GateSpec::arity() const {
    switch (gate) {
        case Gate::CNOT:
        case Gate::CPhase:
        case Gate::CU:
        case Gate::Swap: return 2;
        case Gate::Toffoli: return 3;
        default: return 1;
    }
}

void GateSpec::validate() const {
    std::size_t want = 0;
    switch (gate) {
        case Gate::RX:
        case Gate::RY:
        case Gate::RZ:
        case Gate::Phase:
        case Gate::CPhase: want = 1; break;
        default: want = 0; break;
    }
    if (params.size() != want)
        throw ConfigError(std::string(gate_name(gate)) + " expects " + std::to_string(want) +
                          " parameter(s)");
    if (gate == Gate::CU) {
        if (!custom || custom->dim != 2) throw ConfigError("CU requires a 2x2 unitary");
        if (max_unitarity_deviation(*custom) > kToleranceDouble)
            throw ConfigError("CU matrix is not unitary within tolerance");
    } else if (custom) {
        throw ConfigError("only CU takes a custom matrix");
    }
}

Unitary gate_matrix(const GateSpec& spec) {
    spec.validate();
    switch (spec.gate) {
        case Gate::H: {
            const double s = 1.0 / std::sqrt(2.0);
            return mat2(s, s, s, -s);
        }
        case Gate::X: return mat2(0, 1, 1, 0);
        case Gate::Y: return mat2(0, -kI, kI, 0);
        case Gate::Z: return mat2(1, 0, 0, -1);
        case Gate::RX: {
            const double c = std::cos(spec.params[0] / 2), s = std::sin(spec.params[0] / 2);
            return mat2(c, -kI * s, -kI * s, c);
        }
        case Gate::RY: {
            const double c = std::cos(spec.params[0] / 2), s = std::sin(spec.params[0] / 2);
            return mat2(c, -s, s, c);
        }
        case Gate::RZ: {
            const double c = std::cos(spec.params[0] / 2), s = std::sin(spec.params[0] / 2);
            return mat2(c - kI * s, 0, 0, c + kI * s);
        }
        case Gate::Phase: return mat2(1, 0, 0, std::exp(kI * spec.params[0]));
        case Gate::CNOT: return cnot4();
        case Gate::CPhase: {
            return controlled2(mat2(1, 0, 0, std::exp(kI * spec.params[0])));
        }
        case Gate::CU: return controlled2(*spec.custom);
        case Gate::Swap:
            // SWAP_jk = CNOT_kj CNOT_jk CNOT_kj
            return matmul(matmul(cnot4_flipped(), cnot4()), cnot4_flipped());
        case Gate::Toffoli: {
            Unitary u = identity_matrix(8);
            u.at(6, 6) = u.at(7, 7) = 0;
            u.at(6, 7) = u.at(7, 6) = 1;
            return u;
        }
    }
    throw ConfigError("unknown gate");
}

OperatorCache::OperatorCache(std::size_t capacity) : capacity_(capacity) {}

std::shared_ptr<const Unitary> OperatorCache::get_or_build(
    const std::string& key, const std::function<Unitary()>& build) {
    {
        std::shared_lock lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
    }
    auto value = std::make_shared<const Unitary>(build());
    std::unique_lock lock(mu_);
    auto [it, inserted] = map_.insert_or_assign(key, value);
    if (inserted && capacity_ > 0) {
        order_.push_back(key);
        evict_if_needed();
    }
    return it->second;
}

void OperatorCache::evict_if_needed() {
    while (capacity_ > 0 && map_.size() > capacity_ && !order_.empty()) {
        map_.erase(order_.front());
        order_.pop_front();
    }
}

std::size_t OperatorCache::size() const {
    std::shared_lock lock(mu_);
    return map_.size();
}

void OperatorCache::clear() {
    std::unique_lock lock(mu_);
    map_.clear();
    order_.clear();
}

std::string operator_cache_key(const GateSpec& spec, std::span<const int> targets, int n_qubits) {
    std::ostringstream os;
    os << gate_name(spec.gate);
    // quantize angles so float jitter cannot grow the cache without bound
    for (double p : spec.params) os << ':' << std::llround(p * 1e12);
    if (spec.custom)
        for (const cdouble& v : spec.custom->m)
            os << ':' << std::llround(v.real() * 1e12) << ',' << std::llround(v.imag() * 1e12);
    os << '|';
    for (int t : targets) os << t << ',';
    os << '|' << n_qubits;
    return os.str();
}

namespace {

void validate_targets(const GateSpec& spec, std::span<const int> targets, int n_qubits) {
    if (static_cast<int>(targets.size()) != spec.arity())
        throw ShapeError(std::string(gate_name(spec.gate)) + " takes " +
                         std::to_string(spec.arity()) + " qubit(s)");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= n_qubits) throw IndexError("gate target out of range");
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j]) throw IndexError("duplicate gate target");
    }
}

Unitary build_expanded(const GateSpec& spec, std::span<const int> targets, int n_qubits) {
    std::vector<const Unitary*> factors(static_cast<std::size_t>(n_qubits), nullptr);
    const Unitary base = gate_matrix(spec);

    switch (spec.arity()) {
        case 1: {
            factors[static_cast<std::size_t>(targets[0])] = &base;
            return kron_chain(n_qubits, factors);
        }
        case 2: {
            if (spec.gate == Gate::Swap) {
                // three-CNOT composition, each expanded with its own padding
                const int fwd[] = {targets[0], targets[1]};
                const int rev[] = {targets[1], targets[0]};
                const Unitary a = build_expanded(GateSpec::cnot(), rev, n_qubits);
                const Unitary b = build_expanded(GateSpec::cnot(), fwd, n_qubits);
                return matmul(matmul(a, b), a);
            }
            // |0><0|_j padded identity + |1><1|_j (x) g_k
            const std::size_t j = static_cast<std::size_t>(targets[0]);
            const std::size_t k = static_cast<std::size_t>(targets[1]);
            Unitary g = mat2(base.at(2, 2), base.at(2, 3), base.at(3, 2), base.at(3, 3));
            factors[j] = &proj0();
            Unitary acc = kron_chain(n_qubits, factors);
            factors[j] = &proj1();
            factors[k] = &g;
            add_into(acc, kron_chain(n_qubits, factors));
            return acc;
        }
        case 3: {
            // four-projector sum; only the |11> branch applies X to the target
            const std::size_t i = static_cast<std::size_t>(targets[0]);
            const std::size_t j = static_cast<std::size_t>(targets[1]);
            const std::size_t k = static_cast<std::size_t>(targets[2]);
            Unitary acc(std::size_t{1} << n_qubits);
            for (int ci = 0; ci < 2; ++ci) {
                for (int cj = 0; cj < 2; ++cj) {
                    factors.assign(factors.size(), nullptr);
                    factors[i] = ci ? &proj1() : &proj0();
                    factors[j] = cj ? &proj1() : &proj0();
                    if (ci && cj) factors[k] = &pauli_x();
                    add_into(acc, kron_chain(n_qubits, factors));
                }
            }
            return acc;
        }
    }
    throw ConfigError("unsupported arity");
}

}  // namespace

std::shared_ptr<const Unitary> expand_operator(const GateSpec& spec, std::span<const int> targets,
                                               int n_qubits, OperatorCache* cache) {
    spec.validate();
    validate_targets(spec, targets, n_qubits);
    auto build = [&] { return build_expanded(spec, targets, n_qubits); };
    if (!cache) return std::make_shared<const Unitary>(build());
    return cache->get_or_build(operator_cache_key(spec, targets, n_qubits), build);
}

GateContext& default_gate_context() {
    static GateContext ctx;
    return ctx;
}

void apply_gate(GateContext& ctx, const GateSpec& spec, DensityState& state,
                std::span<const int> targets) {
    spec.validate();
    validate_targets(spec, targets, state.n_qubits());
    if (ctx.use_expanded.load(std::memory_order_relaxed)) {
        auto op = expand_operator(spec, targets, state.n_qubits(),
                                  ctx.cache_enabled.load(std::memory_order_relaxed) ? &ctx.cache
                                                                                    : nullptr);
        state.apply_unitary(op->m);
    } else {
        const Unitary base = gate_matrix(spec);
        state.apply_targeted_unitary(base.m, targets);
    }
}

void apply_gate(GateContext& ctx, const GateSpec& spec, std::span<const QubitRef> qubits) {
    if (qubits.empty()) throw ShapeError("no qubits given");
    EnsembleStore* stream = qubits[0].stream;
    if (!stream) throw RoutingError("qubit reference has no stream");
    std::vector<int> targets;
    targets.reserve(qubits.size());
    for (const QubitRef& q : qubits) {
        if (q.stream != stream || q.system != qubits[0].system)
            throw CrossSystemError("gate spans more than one system");
        targets.push_back(q.qubit);
    }
    DensityState state = stream->system_at(qubits[0].system);
    apply_gate(ctx, spec, state, targets);
}

void apply_circuit(GateContext& ctx, const Circuit& circuit, DensityState& state,
                   std::span<const int> mapping) {
    std::vector<int> targets;
    for (const CircuitStep& step : circuit) {
        targets.clear();
        for (int t : step.targets) targets.push_back(mapping[static_cast<std::size_t>(t)]);
        apply_gate(ctx, step.spec, state, targets);
    }
}

Circuit qft_circuit(int n) {
    Circuit c;
    for (int i = 0; i < n; ++i) {
        c.push_back({GateSpec::h(), {i}});
        for (int m = 2; m <= n - i; ++m)
            c.push_back({GateSpec::cphase(2.0 * M_PI / std::pow(2.0, m)), {i + m - 1, i}});
    }
    return c;
}

void build_qft(DensityState& state, std::span<const int> qubits) {
    std::vector<int> mapping(qubits.begin(), qubits.end());
    apply_circuit(default_gate_context(), qft_circuit(static_cast<int>(qubits.size())), state,
                  mapping);
}

void build_qft(std::span<const QubitRef> qubits) {
    if (qubits.empty()) throw ShapeError("no qubits given");
    EnsembleStore* stream = qubits[0].stream;
    if (!stream) throw RoutingError("qubit reference has no stream");
    std::vector<int> targets;
    for (const QubitRef& q : qubits) {
        if (q.stream != stream || q.system != qubits[0].system)
            throw CrossSystemError("QFT spans more than one system");
        targets.push_back(q.qubit);
    }
    DensityState state = stream->system_at(qubits[0].system);
    build_qft(state, targets);
}

}  // namespace qnet
