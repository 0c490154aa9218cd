#include <doctest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "qnet/channels.hpp"
#include "qnet/gates.hpp"
#include "qnet/qstream.hpp"
#include "support/oracles.hpp"

using namespace qnet;

TEST_CASE("conduits preserve FIFO order and compute propagation delay") {
    Conduit<int> c("test", 1.0, 2.998e5);
    CHECK(c.delay_ns() == doctest::Approx(3335.55703802535).epsilon(1e-12));
    c.transmit(1, 10.0);
    c.transmit(2, 11.0);
    c.transmit(3, 12.0);
    for (int want = 1; want <= 3; ++want) {
        auto d = c.deliver();
        CHECK(d.item == want);
        CHECK(d.receive_time == d.emission + c.delay_ns());
    }
}

TEST_CASE("zero-length conduits deliver at emission time") {
    Conduit<int> c("zero", 0.0, 2.998e5);
    c.transmit(7, 42.0);
    auto d = c.deliver();
    CHECK(d.receive_time == 42.0);
}

TEST_CASE("deliver blocks until an item arrives") {
    Conduit<int> c("blocking", 0.0, 1.0);
    std::thread producer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        c.transmit(5, 0.0);
    });
    auto d = c.deliver();  // must wait for the producer
    CHECK(d.item == 5);
    producer.join();
}

TEST_CASE("bounded conduits block the sender until space frees up") {
    Conduit<int> c("bounded", 0.0, 1.0, std::size_t{1});
    c.transmit(1, 0.0);
    std::thread consumer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        c.deliver();
    });
    c.transmit(2, 1.0);  // blocks until the consumer drains one
    consumer.join();
    CHECK(c.deliver().item == 2);
}

TEST_CASE("closed empty conduit raises broken link; queued items still drain") {
    Conduit<int> c("closing", 0.0, 1.0);
    c.transmit(9, 0.0);
    c.close(false);
    CHECK(c.deliver().item == 9);
    CHECK_THROWS_AS(c.deliver(), BrokenLinkError);
    CHECK_THROWS_AS(c.transmit(1, 0.0), BrokenLinkError);

    Conduit<int> a("aborting", 0.0, 1.0);
    a.close(true);
    CHECK_THROWS_AS(a.deliver(), AbortedError);
}

TEST_CASE("validation of channel geometry") {
    CHECK_THROWS_AS(Conduit<int>("bad", -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(Conduit<int>("bad", 1.0, 0.0), ConfigError);
}

TEST_CASE("none model returns the qubit unchanged, always") {
    EnsembleStore stream(1, 1);
    Rng rng(1);
    const ErrorModel m = ErrorModel::none();
    const QubitRef q = stream.qubit(0, 0);
    for (int i = 0; i < 100; ++i) {
        auto out = apply_error(m, q, 5.0, rng);
        REQUIRE(out.has_value());
        CHECK(*out == q);
    }
}

TEST_CASE("attenuation drop probability follows 1 - 10^(-alpha L / 10)") {
    const ErrorModel m = ErrorModel::attenuation(0.16);
    CHECK(m.drop_probability(0.0) == 0.0);
    CHECK(m.drop_probability(1.0) == doctest::Approx(0.036163).epsilon(1e-4));
    // evaluated directly from the formula
    CHECK(m.drop_probability(1.0) == doctest::Approx(1.0 - std::pow(10.0, -0.016)).epsilon(1e-15));
    CHECK(m.drop_probability(2.5) ==
          doctest::Approx(1.0 - std::pow(10.0, -0.16 * 2.5 / 10.0)).epsilon(1e-15));
}

TEST_CASE("attenuation statistics over 1e5 qubits at 1 km") {
    EnsembleStore stream(1, 1);
    Rng rng(20250812);
    const ErrorModel m = ErrorModel::attenuation(0.16);
    const QubitRef q = stream.qubit(0, 0);
    const int n = 100000;
    int lost = 0;
    for (int i = 0; i < n; ++i)
        if (!apply_error(m, q, 1.0, rng)) ++lost;
    const double p = 1.0 - std::pow(10.0, -0.016);
    const double sigma = oracle::binomial_sigma(p, n);
    CHECK(std::abs(lost / static_cast<double>(n) - p) < 3 * sigma);
}

TEST_CASE("loss never mutates the underlying state") {
    EnsembleStore stream(2, 1);
    DensityState sys = stream.system_at(0);
    H(sys, 0);
    CNOT(sys, 0, 1);
    DensityState before = sys.clone();

    Rng rng(3);
    const ErrorModel m = ErrorModel::attenuation(10.0);  // drops almost everything
    int lost = 0;
    for (int i = 0; i < 50; ++i)
        if (!apply_error(m, stream.qubit(0, 0), 10.0, rng)) ++lost;
    CHECK(lost > 0);
    CHECK(sys.max_abs_diff(before) == 0.0);
}

TEST_CASE("random_unitary model corrupts the state in place with probability p") {
    EnsembleStore stream(1, 1);
    Rng rng(4);
    const ErrorModel always = ErrorModel::random_unitary(1.0);
    auto out = apply_error(always, stream.qubit(0, 0), 0.0, rng);
    REQUIRE(out.has_value());
    // |0><0| hit by a Haar unitary lands away from |0><0| almost surely
    CHECK(stream.system_at(0).entry(0, 0).real() < 1.0 - 1e-6);

    EnsembleStore other(1, 1);
    const ErrorModel never = ErrorModel::random_unitary(0.0);
    apply_error(never, other.qubit(0, 0), 0.0, rng);
    CHECK(other.system_at(0).entry(0, 0) == cdouble(1));
}

TEST_CASE("haar samples are unitary and |U00|^2 is uniform") {
    Rng rng(314159);
    std::vector<double> u00sq;
    for (int i = 0; i < 10000; ++i) {
        const Unitary u = haar_unitary_2x2(rng);
        if (i < 200) CHECK(max_unitarity_deviation(u) < 1e-12);
        u00sq.push_back(std::norm(u.m[0]));
    }
    // KS against Uniform[0,1] at the 1% level
    const double d = oracle::ks_distance_uniform(u00sq);
    CHECK(d < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("group corruption index is uniform over nine positions") {
    Rng rng(654321);
    int counts[9] = {};
    const int n = 9000;
    for (int i = 0; i < n; ++i) ++counts[sample_group_corruption(rng, 9).index];
    const double sigma = oracle::binomial_sigma(1.0 / 9, n);
    for (int c : counts) CHECK(std::abs(c / static_cast<double>(n) - 1.0 / 9) < 3 * sigma);
}

TEST_CASE("random_single_qubit_corruption applies to exactly one qubit of nine") {
    EnsembleStore stream(9, 1);
    std::vector<QubitRef> group;
    for (int k = 0; k < 9; ++k) group.push_back(stream.qubit(0, k));

    Rng rng(10);
    const CorruptionRecord rec = random_single_qubit_corruption(group, rng);
    CHECK(rec.index >= 0);
    CHECK(rec.index < 9);
    DensityState sys = stream.system_at(0);
    // only the hit qubit can carry population away from |0>
    for (int k = 0; k < 9; ++k) {
        const double p1 = sys.probability_of(k, 1);
        if (k == rec.index)
            CHECK(p1 == doctest::Approx(std::norm(rec.u.m[2])).epsilon(1e-9));
        else
            CHECK(p1 < 1e-12);
    }

    group.pop_back();
    CHECK_THROWS_AS(random_single_qubit_corruption(group, rng), UsageError);
}

TEST_CASE("group corruption model hits each system once, identically across conduits") {
    const Rng base(777);
    auto rec_a = std::make_shared<std::vector<CorruptionEvent>>();
    auto rec_b = std::make_shared<std::vector<CorruptionEvent>>();
    const ErrorModel ma = make_group_corruption_model(base, 9, rec_a);
    const ErrorModel mb = make_group_corruption_model(base, 9, rec_b);

    EnsembleStore sa(9, 3), sb(9, 3);
    Rng unused(0);
    for (std::uint32_t sys = 0; sys < 3; ++sys)
        for (int k = 0; k < 9; ++k) {
            apply_error(ma, sa.qubit(sys, k), 0.0, unused);
            apply_error(mb, sb.qubit(sys, k), 0.0, unused);
        }
    REQUIRE(rec_a->size() == 3);  // one corruption per group
    REQUIRE(rec_b->size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK((*rec_a)[i].system == (*rec_b)[i].system);
        CHECK((*rec_a)[i].qubit == (*rec_b)[i].qubit);
        CHECK(oracle::max_abs_diff(oracle::Mat((*rec_a)[i].u.m.begin(), (*rec_a)[i].u.m.end()),
                                   oracle::Mat((*rec_b)[i].u.m.begin(), (*rec_b)[i].u.m.end())) ==
              0.0);
    }
}

TEST_CASE("forced-identity corruption leaves states untouched") {
    const Rng base(88);
    const ErrorModel m = make_group_corruption_model(base, 9, nullptr, true);
    EnsembleStore s(9, 1);
    Rng unused(0);
    for (int k = 0; k < 9; ++k) apply_error(m, s.qubit(0, k), 0.0, unused);
    CHECK(s.system_at(0).entry(0, 0) == cdouble(1));
}

TEST_CASE("custom hooks compose error models in sequence") {
    // chain: attenuation then random_unitary, equal to applying them in order
    const ErrorModel chained = ErrorModel::custom(
        [att = ErrorModel::attenuation(3.0), ru = ErrorModel::random_unitary(1.0)](
            QubitRef q, double length, Rng& rng) -> MaybeQubit {
            auto kept = att.apply(q, length, rng);
            if (!kept) return std::nullopt;
            return ru.apply(*kept, length, rng);
        });

    EnsembleStore sa(1, 1), sb(1, 1);
    Rng ra(31337), rb(31337);
    auto out_a = apply_error(chained, sa.qubit(0, 0), 1.0, ra);

    const ErrorModel att = ErrorModel::attenuation(3.0);
    const ErrorModel ru = ErrorModel::random_unitary(1.0);
    MaybeQubit out_b = att.apply(sb.qubit(0, 0), 1.0, rb);
    if (out_b) out_b = ru.apply(*out_b, 1.0, rb);

    CHECK(out_a.has_value() == out_b.has_value());
    CHECK(sa.system_at(0).max_abs_diff(sb.system_at(0)) == 0.0);
}

TEST_CASE("quantum conduit applies its model exactly once per delivery") {
    EnsembleStore stream(1, 2);
    QuantumConduit c("q:test", 0.0, 1.0, ErrorModel::random_unitary(1.0));
    c.reseed(Rng(5));
    c.transmit(stream.qubit(0, 0), 0.0);
    c.transmit(std::nullopt, 1.0);  // forwarded loss passes through untouched

    auto d1 = c.deliver();
    REQUIRE(d1.item.has_value());
    CHECK(stream.system_at(0).entry(0, 0).real() < 1.0 - 1e-6);  // corrupted once
    CHECK(stream.system_at(1).entry(0, 0) == cdouble(1));        // other system untouched

    auto d2 = c.deliver();
    CHECK(!d2.item.has_value());
}
