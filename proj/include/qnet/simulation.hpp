#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/agents.hpp"

namespace qnet {

/// A validated set of agents to run concurrently. Every agent executes its
/// program in its own thread; outputs land in the sink. The watchdog aborts
/// runs whose agents are all blocked for longer than watchdog_s.
struct SimulationPlan {
    std::vector<AgentRuntime*> agents;
    OutputSink* sink = nullptr;  // optional; an internal sink is used if null
    std::uint64_t seed = 0;
    bool progress = false;
    double watchdog_s = 60.0;
};

/// Runs the plan to completion and returns the published outputs. Any agent
/// failure aborts the whole run and surfaces as RunError with the failing
/// agent's name; a watchdog timeout lists the blocked endpoints.
Payload run_simulation(SimulationPlan& plan);

/// One-line per-agent progress counters ("alice 5/10 | bob 3/10").
std::string render_progress(const std::vector<AgentRuntime*>& agents);

}  // namespace qnet
