#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "qnet/qstate.hpp"
#include "qnet/types.hpp"

namespace qnet {

/// Iteration cursor. Each consumer (typically one agent) owns its own cursor,
/// so agents traverse a shared stream independently.
struct StreamCursor {
    std::size_t next = 0;
    void reset() { next = 0; }
};

/// Ensemble of `count` identically-sized systems stored in one pre-allocated
/// contiguous block: system i occupies entries [i*4^N, (i+1)*4^N). All agent
/// contexts of a simulation see the same block; exclusivity of access comes
/// from channel handoff, not locks.
class EnsembleStore {
public:
    EnsembleStore(int n_qubits, std::size_t count, Precision prec = Precision::Double,
                  bool shared = true, int max_qubits = kDefaultMaxQubits);

    int n_qubits() const { return n_; }
    std::size_t count() const { return count_; }
    Precision precision() const { return prec_; }
    bool shared() const { return shared_; }
    std::uint64_t id() const { return id_; }

    std::size_t system_dim() const { return std::size_t{1} << n_; }
    std::size_t system_payload_bytes() const {
        return system_dim() * system_dim() * entry_bytes(prec_);
    }
    std::size_t block_bytes() const { return count_ * system_payload_bytes(); }

    /// Aliasing view of system i; mutations are visible to every holder.
    DensityState system_at(std::size_t i);

    QubitRef qubit(std::size_t system, int qubit_index);

    std::optional<DensityState> next(StreamCursor& cursor);

    /// Store-level iteration with the built-in cursor; yields nothing after
    /// full consumption until reset_iteration().
    std::optional<DensityState> next();
    void reset_iteration() { own_cursor_.reset(); }

    // Debug holder tracking. When enabled, sends verify that the sender holds
    // the reference; violations of the handoff discipline raise HolderError.
    void set_holder_tracking(bool enabled);
    bool holder_tracking() const { return holder_tracking_; }
    void claim_system(std::size_t system, const std::string& holder);
    void claim_qubit(const QubitRef& q, const std::string& holder);
    void release_qubit(const QubitRef& q, const std::string& expected_holder);
    std::string holder_of(const QubitRef& q) const;

private:
    std::uint64_t holder_key(const QubitRef& q) const {
        return (static_cast<std::uint64_t>(q.system) << 16) | q.qubit;
    }

    int n_;
    std::size_t count_;
    Precision prec_;
    bool shared_;
    std::uint64_t id_;
    std::shared_ptr<detail::StateBlock> block_;
    StreamCursor own_cursor_;

    bool holder_tracking_ = false;
    mutable std::mutex holder_mu_;
    std::unordered_map<std::uint64_t, std::string> holders_;
};

inline std::unique_ptr<EnsembleStore> new_stream(int n_qubits, std::size_t count,
                                                 Precision prec = Precision::Double,
                                                 bool shared = true) {
    return std::make_unique<EnsembleStore>(n_qubits, count, prec, shared);
}

/// Resolves a reference to its system's state view.
DensityState resolve(const QubitRef& q);

}  // namespace qnet
