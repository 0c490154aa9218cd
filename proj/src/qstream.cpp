#include "qnet/qstream.hpp"

#include <atomic>
#include <cstring>
#include <limits>

namespace qnet {

namespace {
std::uint64_t next_stream_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
}  // namespace

EnsembleStore::EnsembleStore(int n_qubits, std::size_t count, Precision prec, bool shared,
                             int max_qubits)
    : n_(n_qubits), count_(count), prec_(prec), shared_(shared), id_(next_stream_id()) {
    if (n_qubits < 1 || n_qubits > max_qubits)
        throw SizeError("system size " + std::to_string(n_qubits) + " outside [1, " +
                        std::to_string(max_qubits) + "]");
    if (count == 0) throw SizeError("stream needs at least one system");
    const std::size_t payload = system_payload_bytes();
    if (count > std::numeric_limits<std::size_t>::max() / payload)
        throw ResourceError("stream exceeds addressable memory");
    block_ = detail::make_block(count * payload, prec);

    std::byte* data = detail::block_data(*block_);
    std::memset(data, 0, count * payload);
    for (std::size_t i = 0; i < count; ++i) {
        if (prec == Precision::Double)
            *reinterpret_cast<cdouble*>(data + i * payload) = cdouble(1);
        else
            *reinterpret_cast<cfloat*>(data + i * payload) = cfloat(1);
    }
}

DensityState EnsembleStore::system_at(std::size_t i) {
    if (i >= count_)
        throw IndexError("system index " + std::to_string(i) + " out of range (count " +
                         std::to_string(count_) + ")");
    std::byte* data = detail::block_data(*block_) + i * system_payload_bytes();
    return DensityState(block_, data, n_, prec_);
}

QubitRef EnsembleStore::qubit(std::size_t system, int qubit_index) {
    if (system >= count_) throw IndexError("system index out of range");
    if (qubit_index < 0 || qubit_index >= n_) throw IndexError("qubit index out of range");
    return QubitRef{this, static_cast<std::uint32_t>(system),
                    static_cast<std::uint16_t>(qubit_index)};
}

std::optional<DensityState> EnsembleStore::next(StreamCursor& cursor) {
    if (cursor.next >= count_) return std::nullopt;
    return system_at(cursor.next++);
}

std::optional<DensityState> EnsembleStore::next() { return next(own_cursor_); }

void EnsembleStore::set_holder_tracking(bool enabled) {
    std::lock_guard lock(holder_mu_);
    holder_tracking_ = enabled;
    if (!enabled) holders_.clear();
}

void EnsembleStore::claim_system(std::size_t system, const std::string& holder) {
    if (!holder_tracking_) return;
    std::lock_guard lock(holder_mu_);
    for (int k = 0; k < n_; ++k)
        holders_[(static_cast<std::uint64_t>(system) << 16) | static_cast<std::uint64_t>(k)] =
            holder;
}

void EnsembleStore::claim_qubit(const QubitRef& q, const std::string& holder) {
    if (!holder_tracking_) return;
    std::lock_guard lock(holder_mu_);
    holders_[holder_key(q)] = holder;
}

void EnsembleStore::release_qubit(const QubitRef& q, const std::string& expected_holder) {
    if (!holder_tracking_) return;
    std::lock_guard lock(holder_mu_);
    auto it = holders_.find(holder_key(q));
    const std::string actual = it == holders_.end() ? std::string() : it->second;
    if (actual != expected_holder)
        throw HolderError("qubit (" + std::to_string(q.system) + "," + std::to_string(q.qubit) +
                          ") held by '" + actual + "', not '" + expected_holder + "'");
    holders_.erase(it);
}

std::string EnsembleStore::holder_of(const QubitRef& q) const {
    std::lock_guard lock(holder_mu_);
    auto it = holders_.find(holder_key(q));
    return it == holders_.end() ? std::string() : it->second;
}

DensityState resolve(const QubitRef& q) {
    if (!q.stream) throw RoutingError("qubit reference has no stream");
    return q.stream->system_at(q.system);
}

}  // namespace qnet
