#include "qnet/agents.hpp"

#include <algorithm>

namespace qnet {

void OutputSink::publish(const std::string& agent, Payload payload) {
    std::lock_guard lock(mu_);
    if (map_.contains(agent)) throw UsageError("agent '" + agent + "' already published");
    map_[agent] = std::move(payload);
}

bool OutputSink::has(const std::string& agent) const {
    std::lock_guard lock(mu_);
    return map_.contains(agent);
}

Payload OutputSink::contents() const {
    std::lock_guard lock(mu_);
    return map_;
}

std::size_t OutputSink::size() const {
    std::lock_guard lock(mu_);
    return map_.size();
}

class AgentRuntime::BlockedScope {
public:
    BlockedScope(AgentRuntime& agent, std::string what) : agent_(agent) {
        std::lock_guard lock(agent_.blocked_mu_);
        agent_.blocked_ = std::move(what);
    }
    ~BlockedScope() {
        std::lock_guard lock(agent_.blocked_mu_);
        agent_.blocked_.clear();
    }

private:
    AgentRuntime& agent_;
};

AgentRuntime::AgentRuntime(std::string name, EnsembleStore* stream)
    : name_(std::move(name)), stream_(stream) {
    if (name_.empty()) throw ConfigError("agent name must be nonempty");
}

void AgentRuntime::run_program() {
    if (!program_) throw UsageError("agent '" + name_ + "' has no program");
    program_(*this);
}

void AgentRuntime::set_pulse_ns(double ns) {
    if (ns < 0) throw ConfigError("pulse length must be >= 0");
    pulse_ns_ = ns;
}

const Endpoint& AgentRuntime::endpoint(const std::string& peer, bool quantum) const {
    auto it = peers_.find(peer);
    const bool ok = it != peers_.end() && (quantum ? it->second.q_out && it->second.q_in
                                                   : it->second.c_out && it->second.c_in);
    if (!ok)
        throw RoutingError("agent '" + name_ + "' has no " +
                           (quantum ? "quantum" : "classical") + " link to '" + peer + "'");
    return it->second;
}

void AgentRuntime::advance_clock_to(TimeNs t) {
    const TimeNs next = std::max(clock_ns_, t);
    if (next < clock_ns_) throw Error("clock went backwards");  // unreachable by construction
    clock_ns_ = next;
}

void AgentRuntime::qsend(const std::string& peer, MaybeQubit q) {
    const Endpoint& ep = endpoint(peer, true);
    if (q && q->stream && q->stream->holder_tracking())
        q->stream->release_qubit(*q, name_);  // raises on unheld/foreign refs
    clock_ns_ += pulse_ns_;
    if (q && q->stream && q->stream->holder_tracking())
        q->stream->claim_qubit(*q, "@" + ep.q_out->name());
    BlockedScope scope(*this, "qsend to '" + peer + "'");
    ep.q_out->transmit(std::move(q), clock_ns_);
}

MaybeQubit AgentRuntime::qrecv(const std::string& peer) {
    const Endpoint& ep = endpoint(peer, true);
    BlockedScope scope(*this, "qrecv from '" + peer + "'");
    auto d = ep.q_in->deliver();
    advance_clock_to(d.receive_time);
    if (d.item) {
        if (d.item->stream && d.item->stream->holder_tracking())
            d.item->stream->claim_qubit(*d.item, name_);
    } else {
        lost_.fetch_add(1);
    }
    return d.item;
}

void AgentRuntime::csend(const std::string& peer, Payload payload) {
    const Endpoint& ep = endpoint(peer, false);
    if (metering_ == ClassicalMetering::PerBit) {
        // charged by serialized size; empty payloads still cost one pulse
        const std::size_t bits = payload.dump().size() * 8;
        clock_ns_ += pulse_ns_ * static_cast<double>(std::max<std::size_t>(bits, 1));
    } else {
        clock_ns_ += pulse_ns_;
    }
    BlockedScope scope(*this, "csend to '" + peer + "'");
    ep.c_out->transmit(std::move(payload), clock_ns_);
}

Payload AgentRuntime::crecv(const std::string& peer) {
    const Endpoint& ep = endpoint(peer, false);
    BlockedScope scope(*this, "crecv from '" + peer + "'");
    auto d = ep.c_in->deliver();
    advance_clock_to(d.receive_time);
    return std::move(d.item);
}

int AgentRuntime::measure(const QubitRef& q) {
    if (q.stream && q.stream->holder_tracking() && q.stream->holder_of(q) != name_)
        throw HolderError("agent '" + name_ + "' measured a qubit it does not hold");
    return resolve(q).measure_qubit(q.qubit, rng_).bit;
}

void AgentRuntime::output(Payload payload) {
    if (!sink_) throw UsageError("agent '" + name_ + "' has no output sink");
    sink_->publish(name_, std::move(payload));
}

std::optional<AgentRuntime::StreamItem> AgentRuntime::next_system() {
    if (!stream_) throw UsageError("agent '" + name_ + "' has no stream");
    auto s = stream_->next(cursor_);
    if (!s) return std::nullopt;
    const std::size_t index = cursor_.next - 1;
    stream_->claim_system(index, name_);
    consumed_.fetch_add(1);
    return StreamItem{index, *std::move(s)};
}

std::string AgentRuntime::blocked_on() const {
    std::lock_guard lock(blocked_mu_);
    return blocked_;
}

void AgentRuntime::install_classical(const std::string& peer,
                                     std::shared_ptr<ClassicalConduit> out,
                                     std::shared_ptr<ClassicalConduit> in) {
    Endpoint& ep = peers_[peer];
    if (ep.c_out || ep.c_in)
        throw ConfigError("classical link " + name_ + "<->" + peer + " already exists");
    ep.c_out = std::move(out);
    ep.c_in = std::move(in);
}

void AgentRuntime::install_quantum(const std::string& peer, std::shared_ptr<QuantumConduit> out,
                                   std::shared_ptr<QuantumConduit> in) {
    Endpoint& ep = peers_[peer];
    if (ep.q_out || ep.q_in)
        throw ConfigError("quantum link " + name_ + "<->" + peer + " already exists");
    ep.q_out = std::move(out);
    ep.q_in = std::move(in);
}

void qconnect(AgentRuntime& a, AgentRuntime& b, ErrorModel model, double length_km,
              double signal_speed_km_per_s, std::optional<std::size_t> capacity) {
    if (&a == &b || a.name() == b.name())
        throw ConfigError("cannot connect agent '" + a.name() + "' to itself");
    auto ab = std::make_shared<QuantumConduit>("q:" + a.name() + "->" + b.name(), length_km,
                                               signal_speed_km_per_s, model, capacity);
    auto ba = std::make_shared<QuantumConduit>("q:" + b.name() + "->" + a.name(), length_km,
                                               signal_speed_km_per_s, model, capacity);
    a.install_quantum(b.name(), ab, ba);
    b.install_quantum(a.name(), ba, ab);
}

void cconnect(AgentRuntime& a, AgentRuntime& b, double length_km, double signal_speed_km_per_s,
              std::optional<std::size_t> capacity) {
    if (&a == &b || a.name() == b.name())
        throw ConfigError("cannot connect agent '" + a.name() + "' to itself");
    auto ab = std::make_shared<ClassicalConduit>("c:" + a.name() + "->" + b.name(), length_km,
                                                 signal_speed_km_per_s, capacity);
    auto ba = std::make_shared<ClassicalConduit>("c:" + b.name() + "->" + a.name(), length_km,
                                                 signal_speed_km_per_s, capacity);
    a.install_classical(b.name(), ab, ba);
    b.install_classical(a.name(), ba, ab);
}

}  // namespace qnet
