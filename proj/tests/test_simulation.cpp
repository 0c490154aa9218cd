#include <doctest.h>

#include "qnet/agents.hpp"
#include "qnet/gates.hpp"
#include "qnet/simulation.hpp"

using namespace qnet;

namespace {

// the quantum network "ping": Alice prepares states, Bob measures and replies
struct Ping {
    EnsembleStore stream{1, 10};
    AgentRuntime alice{"Alice", &stream};
    AgentRuntime bob{"Bob", &stream};

    Ping() {
        qconnect(alice, bob);
        cconnect(alice, bob);
        alice.set_program([this](AgentRuntime& self) {
            std::vector<int> sent, echoed;
            while (auto item = self.next_system()) {
                const std::size_t i = item->index;
                const int bit = static_cast<int>(self.rng().uniform_int(2));
                if (bit) X(stream.qubit(i, 0));
                sent.push_back(bit);
                self.qsend("Bob", stream.qubit(i, 0));
                echoed.push_back(self.crecv("Bob").get<int>());
            }
            self.output(Payload{{"sent", sent}, {"echoed", echoed}});
        });
        bob.set_program([](AgentRuntime& self) {
            std::vector<int> got;
            while (auto item = self.next_system()) {
                MaybeQubit q = self.qrecv("Alice");
                const int bit = self.measure(*q);
                got.push_back(bit);
                self.csend("Alice", Payload(bit));
            }
            self.output(Payload{{"bits", got}});
        });
    }
};

}  // namespace

TEST_CASE("ping: Bob's received bits equal Alice's sent bits") {
    Ping ping;
    SimulationPlan plan;
    plan.agents = {&ping.alice, &ping.bob};
    plan.seed = 12;
    const Payload out = run_simulation(plan);
    CHECK(out.at("Bob").at("bits") == out.at("Alice").at("sent"));
    CHECK(out.at("Alice").at("echoed") == out.at("Alice").at("sent"));
    CHECK(out.size() == 2);
}

TEST_CASE("zero-agent plan returns an empty sink immediately") {
    SimulationPlan plan;
    const Payload out = run_simulation(plan);
    CHECK(out.is_object());
    CHECK(out.empty());
}

TEST_CASE("same seed reproduces outputs and final clocks") {
    Payload first, second;
    double clock_a1 = 0, clock_a2 = 0, clock_b1 = 0, clock_b2 = 0;
    {
        Ping ping;
        SimulationPlan plan;
        plan.agents = {&ping.alice, &ping.bob};
        plan.seed = 777;
        first = run_simulation(plan);
        clock_a1 = ping.alice.clock_s();
        clock_b1 = ping.bob.clock_s();
    }
    {
        Ping ping;
        SimulationPlan plan;
        plan.agents = {&ping.alice, &ping.bob};
        plan.seed = 777;
        second = run_simulation(plan);
        clock_a2 = ping.alice.clock_s();
        clock_b2 = ping.bob.clock_s();
    }
    CHECK(first == second);
    CHECK(clock_a1 == clock_a2);
    CHECK(clock_b1 == clock_b2);
}

TEST_CASE("different seeds give different measurement records") {
    Payload first, second;
    {
        Ping ping;
        SimulationPlan plan;
        plan.agents = {&ping.alice, &ping.bob};
        plan.seed = 1;
        first = run_simulation(plan);
    }
    {
        Ping ping;
        SimulationPlan plan;
        plan.agents = {&ping.alice, &ping.bob};
        plan.seed = 2;
        second = run_simulation(plan);
    }
    CHECK(first != second);
}

TEST_CASE("plan validation: duplicate names and dangling peers") {
    EnsembleStore stream(1, 1);
    AgentRuntime a1("A", &stream), a2("A", &stream);
    a1.set_program([](AgentRuntime&) {});
    a2.set_program([](AgentRuntime&) {});
    SimulationPlan plan;
    plan.agents = {&a1, &a2};
    CHECK_THROWS_AS(run_simulation(plan), ConfigError);

    AgentRuntime b("B", &stream), c("C", &stream);
    qconnect(b, c);
    b.set_program([](AgentRuntime&) {});
    SimulationPlan dangling;
    dangling.agents = {&b};  // C is referenced but not in the plan
    CHECK_THROWS_AS(run_simulation(dangling), ConfigError);
}

TEST_CASE("an agent failure aborts the run and names the agent") {
    EnsembleStore stream(1, 4);
    AgentRuntime alice("Alice", &stream), bob("Bob", &stream);
    qconnect(alice, bob);
    alice.set_program([](AgentRuntime&) { throw std::runtime_error("boom"); });
    bob.set_program([](AgentRuntime& self) {
        while (true) self.qrecv("Alice");  // would block forever
    });
    SimulationPlan plan;
    plan.agents = {&alice, &bob};
    try {
        run_simulation(plan);
        FAIL("expected RunError");
    } catch (const RunError& e) {
        CHECK(e.agent == "Alice");
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
}

TEST_CASE("peer termination surfaces as a broken link, not a hang") {
    EnsembleStore stream(1, 2);
    AgentRuntime alice("Alice", &stream), bob("Bob", &stream);
    qconnect(alice, bob);
    alice.set_program([&stream](AgentRuntime& self) {
        self.qsend("Bob", stream.qubit(0, 0));  // sends one, peer expects two
    });
    bob.set_program([](AgentRuntime& self) {
        self.qrecv("Alice");
        self.qrecv("Alice");  // alice is done: broken link
    });
    SimulationPlan plan;
    plan.agents = {&alice, &bob};
    try {
        run_simulation(plan);
        FAIL("expected RunError");
    } catch (const RunError& e) {
        CHECK(e.agent == "Bob");
        CHECK(std::string(e.what()).find("closed") != std::string::npos);
    }
}

TEST_CASE("watchdog flags a true deadlock and lists blocked endpoints") {
    EnsembleStore stream(1, 1);
    AgentRuntime alice("Alice", &stream), bob("Bob", &stream);
    qconnect(alice, bob);
    // both wait for the other to send first
    alice.set_program([](AgentRuntime& self) { self.qrecv("Bob"); });
    bob.set_program([](AgentRuntime& self) { self.qrecv("Alice"); });
    SimulationPlan plan;
    plan.agents = {&alice, &bob};
    plan.watchdog_s = 0.3;
    try {
        run_simulation(plan);
        FAIL("expected RunError");
    } catch (const RunError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("watchdog") != std::string::npos);
        CHECK(msg.find("Alice") != std::string::npos);
        CHECK(msg.find("qrecv from 'Bob'") != std::string::npos);
    }
}

TEST_CASE("progress counters advance per agent and render as counters") {
    EnsembleStore stream(1, 10);
    AgentRuntime alice("Alice", &stream), bob("Bob", &stream);
    qconnect(alice, bob);
    alice.set_program([&stream](AgentRuntime& self) {
        while (auto item = self.next_system()) self.qsend("Bob", stream.qubit(item->index, 0));
    });
    bob.set_program([](AgentRuntime& self) {
        for (int i = 0; i < 4; ++i) self.next_system();  // independent cursor, partial
        while (true) {
            try {
                self.qrecv("Alice");
            } catch (const BrokenLinkError&) {
                break;
            }
        }
    });
    SimulationPlan plan;
    plan.agents = {&alice, &bob};
    run_simulation(plan);
    CHECK(alice.systems_consumed() == 10);
    CHECK(bob.systems_consumed() == 4);
    CHECK(render_progress({&alice, &bob}) == "Alice 10/10 | Bob 4/10");
}

TEST_CASE("causality: every delivery happens at or after emission plus delay") {
    EnsembleStore stream(1, 32);
    AgentRuntime alice("Alice", &stream), bob("Bob", &stream);
    qconnect(alice, bob, ErrorModel::none(), 0.5);
    alice.set_program([&stream](AgentRuntime& self) {
        while (auto item = self.next_system()) self.qsend("Bob", stream.qubit(item->index, 0));
        self.output(Payload{{"clock_ns", self.clock_ns()}});
    });
    bob.set_program([](AgentRuntime& self) {
        const double delay = 0.5 / kDefaultSignalSpeedKmPerS * 1e9;
        double prev = 0;
        while (auto item = self.next_system()) {
            self.qrecv("Alice");
            CHECK(self.clock_ns() >= prev);  // monotone
            CHECK(self.clock_ns() >= delay);
            prev = self.clock_ns();
        }
        self.output(Payload{{"clock_ns", self.clock_ns()}});
    });
    SimulationPlan plan;
    plan.agents = {&alice, &bob};
    const Payload out = run_simulation(plan);
    const double alice_clock = out.at("Alice").at("clock_ns").get<double>();
    const double bob_clock = out.at("Bob").at("clock_ns").get<double>();
    CHECK(bob_clock >= alice_clock);  // last delivery is after last emission
}
