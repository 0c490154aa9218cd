#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnet/channels.hpp"
#include "qnet/qstream.hpp"
#include "qnet/rng.hpp"
#include "qnet/types.hpp"

namespace qnet {

/// Classical payloads are arbitrary JSON values: cheap to pass around,
/// serializable into reports as-is.
using Payload = nlohmann::json;

using ClassicalConduit = Conduit<Payload>;

/// How a classical send is charged against the sender's clock: one pulse per
/// message (default) or one pulse per serialized payload bit.
enum class ClassicalMetering { PerMessage, PerBit };

/// Shared map from agent name to its published result. Each agent publishes
/// at most once per run; reads happen after the simulation completes.
class OutputSink {
public:
    void publish(const std::string& agent, Payload payload);
    bool has(const std::string& agent) const;
    Payload contents() const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    Payload map_ = Payload::object();
};

struct Endpoint {
    std::shared_ptr<ClassicalConduit> c_out, c_in;
    std::shared_ptr<QuantumConduit> q_out, q_in;
};

/// One network node: identity, stream handle, classical/quantum memory, a
/// simulated clock and the conduit ends connecting it to its peers. The
/// program runs in its own thread for the whole simulation; all cross-agent
/// interaction goes through blocking conduits.
class AgentRuntime {
public:
    explicit AgentRuntime(std::string name, EnsembleStore* stream = nullptr);

    const std::string& name() const { return name_; }
    EnsembleStore* qstream() { return stream_; }

    void set_program(std::function<void(AgentRuntime&)> program) { program_ = std::move(program); }
    bool has_program() const { return static_cast<bool>(program_); }
    void run_program();

    // Channel operations. Senders charge one pulse per qubit or classical
    // message; receivers advance to max(own clock, emission + propagation).
    void qsend(const std::string& peer, MaybeQubit q);
    MaybeQubit qrecv(const std::string& peer);
    void csend(const std::string& peer, Payload payload);
    Payload crecv(const std::string& peer);

    int measure(const QubitRef& q);

    /// Publishes this agent's result under its name.
    void output(Payload payload);
    void set_output_sink(OutputSink* sink) { sink_ = sink; }

    struct StreamItem {
        std::size_t index;
        DensityState state;
    };

    /// Next system of the agent's stream (independent per-agent cursor);
    /// feeds the progress counter.
    std::optional<StreamItem> next_system();
    void reset_cursor() { cursor_.reset(); }
    std::size_t systems_consumed() const { return consumed_.load(); }
    std::size_t systems_total() const { return stream_ ? stream_->count() : 0; }

    Rng& rng() { return rng_; }
    void set_rng(const Rng& rng) { rng_ = rng; }

    TimeNs clock_ns() const { return clock_ns_; }
    double clock_s() const { return to_seconds(clock_ns_); }
    double pulse_ns() const { return pulse_ns_; }
    void set_pulse_ns(double ns);
    ClassicalMetering classical_metering() const { return metering_; }
    void set_classical_metering(ClassicalMetering m) { metering_ = m; }

    Payload& classical_memory() { return cmem_; }
    std::vector<QubitRef>& quantum_memory() { return qmem_; }

    std::size_t lost_qubits() const { return lost_.load(); }

    // Wiring (used by qconnect/cconnect and plan validation).
    void install_classical(const std::string& peer, std::shared_ptr<ClassicalConduit> out,
                           std::shared_ptr<ClassicalConduit> in);
    void install_quantum(const std::string& peer, std::shared_ptr<QuantumConduit> out,
                         std::shared_ptr<QuantumConduit> in);
    const std::map<std::string, Endpoint>& endpoints() const { return peers_; }

    /// What the agent is currently blocked on, for watchdog diagnostics.
    std::string blocked_on() const;

private:
    const Endpoint& endpoint(const std::string& peer, bool quantum) const;
    void advance_clock_to(TimeNs t);

    class BlockedScope;

    std::string name_;
    EnsembleStore* stream_;
    StreamCursor cursor_;
    Rng rng_{0};
    TimeNs clock_ns_ = 0.0;
    double pulse_ns_ = kDefaultPulseNs;
    ClassicalMetering metering_ = ClassicalMetering::PerMessage;
    std::map<std::string, Endpoint> peers_;
    Payload cmem_ = Payload::object();
    std::vector<QubitRef> qmem_;
    OutputSink* sink_ = nullptr;
    std::function<void(AgentRuntime&)> program_;
    std::atomic<std::size_t> consumed_{0};
    std::atomic<std::size_t> lost_{0};
    mutable std::mutex blocked_mu_;
    std::string blocked_;
};

/// Installs a bidirectional pair of quantum conduits between a and b with the
/// given error model and geometry.
void qconnect(AgentRuntime& a, AgentRuntime& b, ErrorModel model = ErrorModel::none(),
              double length_km = 0.0, double signal_speed_km_per_s = kDefaultSignalSpeedKmPerS,
              std::optional<std::size_t> capacity = std::nullopt);

/// Classical counterpart of qconnect (no error model).
void cconnect(AgentRuntime& a, AgentRuntime& b, double length_km = 0.0,
              double signal_speed_km_per_s = kDefaultSignalSpeedKmPerS,
              std::optional<std::size_t> capacity = std::nullopt);

}  // namespace qnet
