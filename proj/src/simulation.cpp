#include "qnet/simulation.hpp"

#include <chrono>
#include <condition_variable>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace qnet {

namespace {

struct RunState {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t done = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // agent, message
    bool abort_sent = false;
};

void validate_plan(const SimulationPlan& plan) {
    std::set<std::string> names;
    for (AgentRuntime* a : plan.agents) {
        if (!a) throw ConfigError("plan contains a null agent");
        if (!names.insert(a->name()).second)
            throw ConfigError("duplicate agent name '" + a->name() + "'");
    }
    auto find = [&](const std::string& name) -> AgentRuntime* {
        for (AgentRuntime* a : plan.agents)
            if (a->name() == name) return a;
        return nullptr;
    };
    for (AgentRuntime* a : plan.agents) {
        for (const auto& [peer, ep] : a->endpoints()) {
            AgentRuntime* b = find(peer);
            if (!b)
                throw ConfigError("agent '" + a->name() + "' is connected to '" + peer +
                                  "', which is not in the plan");
            auto it = b->endpoints().find(a->name());
            if (it == b->endpoints().end())
                throw ConfigError("endpoint " + a->name() + "->" + peer + " is one-sided");
            const Endpoint& back = it->second;
            if (ep.q_out != back.q_in || ep.q_in != back.q_out || ep.c_out != back.c_in ||
                ep.c_in != back.c_out)
                throw ConfigError("endpoint " + a->name() + "<->" + peer +
                                  " is not symmetrically installed");
        }
    }
}

void abort_all_conduits(const SimulationPlan& plan) {
    for (AgentRuntime* a : plan.agents) {
        for (const auto& [peer, ep] : a->endpoints()) {
            if (ep.c_out) ep.c_out->close(true);
            if (ep.c_in) ep.c_in->close(true);
            if (ep.q_out) ep.q_out->close(true);
            if (ep.q_in) ep.q_in->close(true);
        }
    }
}

}  // namespace

std::string render_progress(const std::vector<AgentRuntime*>& agents) {
    std::ostringstream os;
    bool first = true;
    for (AgentRuntime* a : agents) {
        if (!first) os << " | ";
        first = false;
        os << a->name() << ' ' << a->systems_consumed() << '/' << a->systems_total();
    }
    return os.str();
}

Payload run_simulation(SimulationPlan& plan) {
    validate_plan(plan);

    OutputSink local_sink;
    OutputSink* sink = plan.sink ? plan.sink : &local_sink;

    const Rng master(plan.seed);
    for (AgentRuntime* a : plan.agents) {
        a->set_rng(master.split("agent:" + a->name()));
        a->set_output_sink(sink);
    }
    // Error-model randomness is per conduit and keyed by its name, so results
    // do not depend on thread scheduling.
    std::set<QuantumConduit*> qconduits;
    for (AgentRuntime* a : plan.agents)
        for (const auto& [peer, ep] : a->endpoints())
            for (const auto& q : {ep.q_out, ep.q_in})
                if (q) qconduits.insert(q.get());
    for (QuantumConduit* q : qconduits) q->reseed(master.split("qerr:" + q->name()));

    if (plan.agents.empty()) return sink->contents();
    for (AgentRuntime* a : plan.agents)
        if (!a->has_program()) throw ConfigError("agent '" + a->name() + "' has no program");

    RunState state;
    const std::size_t n = plan.agents.size();
    std::vector<std::thread> threads;
    threads.reserve(n);

    for (AgentRuntime* agent : plan.agents) {
        threads.emplace_back([agent, &state, &plan] {
            std::string error;
            bool secondary = false;
            try {
                agent->run_program();
            } catch (const AbortedError&) {
                secondary = true;  // casualty of another agent's failure
            } catch (const std::exception& e) {
                error = e.what();
            } catch (...) {
                error = "unknown error";
            }
            // Let peers drain what was already sent, then observe a closed
            // link instead of blocking forever.
            for (const auto& [peer, ep] : agent->endpoints()) {
                if (ep.q_out) ep.q_out->close(false);
                if (ep.c_out) ep.c_out->close(false);
            }
            {
                std::lock_guard lock(state.mu);
                if (!error.empty()) {
                    state.failures.emplace_back(agent->name(), error);
                    if (!state.abort_sent) {
                        state.abort_sent = true;
                        abort_all_conduits(plan);
                    }
                }
                (void)secondary;
                ++state.done;
            }
            state.cv.notify_all();
        });
    }

    // Supervises completion. The watchdog fires only when every unfinished
    // agent has been continuously blocked on a conduit for watchdog_s; agents
    // that are computing keep the run alive.
    std::string watchdog_report;
    {
        using clock = std::chrono::steady_clock;
        auto all_blocked_since = clock::time_point::max();
        std::unique_lock lock(state.mu);
        while (state.done < n) {
            state.cv.wait_for(lock, std::chrono::milliseconds(50));
            if (state.done >= n) break;
            lock.unlock();
            if (plan.progress) std::cerr << '\r' << render_progress(plan.agents) << std::flush;
            bool all_blocked = true;
            for (AgentRuntime* a : plan.agents)
                if (a->blocked_on().empty()) all_blocked = false;
            const auto now = clock::now();
            if (!all_blocked)
                all_blocked_since = clock::time_point::max();
            else if (all_blocked_since == clock::time_point::max())
                all_blocked_since = now;
            lock.lock();
            if (state.done < n && all_blocked &&
                now - all_blocked_since > std::chrono::duration<double>(plan.watchdog_s)) {
                std::ostringstream os;
                os << "deadlock watchdog: all agents blocked for more than " << plan.watchdog_s
                   << " s;";
                for (AgentRuntime* a : plan.agents) {
                    const std::string b = a->blocked_on();
                    if (!b.empty()) os << ' ' << a->name() << " blocked on " << b << ';';
                }
                watchdog_report = os.str();
                if (!state.abort_sent) {
                    state.abort_sent = true;
                    abort_all_conduits(plan);
                }
                break;
            }
        }
    }

    for (std::thread& t : threads) t.join();
    if (plan.progress) std::cerr << '\r' << render_progress(plan.agents) << std::endl;

    if (!watchdog_report.empty()) throw RunError("", watchdog_report);
    std::lock_guard lock(state.mu);
    if (!state.failures.empty()) {
        std::ostringstream os;
        os << "agent '" << state.failures[0].first << "' failed: " << state.failures[0].second;
        for (std::size_t i = 1; i < state.failures.size(); ++i)
            os << "; agent '" << state.failures[i].first << "' failed: " << state.failures[i].second;
        throw RunError(state.failures[0].first, os.str());
    }
    return sink->contents();
}

}  // namespace qnet
