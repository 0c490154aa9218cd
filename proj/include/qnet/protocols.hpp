#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qnet/agents.hpp"
#include "qnet/channels.hpp"
#include "qnet/gates.hpp"
#include "qnet/qstate.hpp"
#include "qnet/types.hpp"

namespace qnet {

struct BitStream {
    enum class Origin { Generated, File };

    std::vector<std::uint8_t> bits;
    Origin origin = Origin::Generated;

    static BitStream from_text(const std::string& text);  // bytes, MSB first
    static BitStream from_bytes(std::span<const std::uint8_t> bytes,
                                Origin origin = Origin::File);
    static BitStream random(std::size_t n, Rng& rng);

    std::string to_text() const;
    std::size_t size() const { return bits.size(); }
    bool operator==(const BitStream&) const = default;
};

struct ProtocolReport {
    std::map<std::string, double> clock_s;
    std::uint64_t lost_qubits = 0;
    std::uint64_t corrupted_groups = 0;
    Payload agent_outputs;

    Payload to_json() const;
};

struct TeleportationOptions {
    Precision precision = Precision::Double;
    bool progress = false;
    /// Optional extra phase rotation per angle (same length as angles); the
    /// prepared state becomes PHASE(phi) RX(theta) |0>.
    std::vector<double> phases;
};

struct TeleportationResult {
    std::vector<double> angles;
    std::vector<double> observed;  // fraction of |1> outcomes per angle
    std::vector<double> expected;  // sin^2(theta/2)
    ProtocolReport report;
};

/// Per angle: prepare RX(theta)|0> on qubit 0 of a 3-qubit system, share a
/// Bell pair on qubits 1-2, teleport qubit 0 from Alice to Bob over classical
/// bits, and report Bob's fraction of |1> outcomes over the ensemble.
TeleportationResult run_teleportation(std::span<const double> angles, std::size_t ensemble,
                                      std::uint64_t seed, const TeleportationOptions& opts = {});

struct SuperdenseOptions {
    double pulse_ns = kDefaultPulseNs;
    double signal_speed_km_per_s = kDefaultSignalSpeedKmPerS;
    std::optional<std::size_t> channel_capacity;  // unbounded when unset
    Precision precision = Precision::Double;
    bool progress = false;
};

struct SuperdenseResult {
    BitStream received;
    ProtocolReport report;
};

/// Charlie (midpoint) distributes Bell halves to Alice and Bob over fiber of
/// length_km/2 each; Alice encodes two bits per pair and forwards her qubit
/// to Bob over a direct length_km fiber. Lost qubits decode as (0,0).
SuperdenseResult run_superdense(const BitStream& data, double length_km, double alpha_db_per_km,
                                std::uint64_t seed, const SuperdenseOptions& opts = {});

struct InterceptionResult {
    BitStream eve_bits;  // one measured bit per intercepted qubit
    BitStream bob_bits;
    ProtocolReport report;
};

/// Superdense coding with Eve inserted on the Alice->Bob hop: she measures
/// each qubit in the computational basis, records the bit, and forwards the
/// collapsed qubit. Channels are noiseless and zero-length.
InterceptionResult run_interception(const BitStream& data, std::uint64_t seed,
                                    Precision precision = Precision::Double);

/// Fig-9-style encoder: logical qubit 0 of a 9-qubit system spread over three
/// GHZ triples (qubits 1..8 must be |0>).
void shor_encode(DensityState& system);

/// Mirrored decoder; recovers the logical state on qubit 0 for any
/// single-qubit corruption between encode and decode.
void shor_decode(DensityState& system);

Circuit shor_encode_circuit();
Circuit shor_decode_circuit();

struct ShorOptions {
    bool force_identity_corruption = false;  // test hook
    Precision precision = Precision::Double;
    bool progress = false;
};

struct ShorResult {
    BitStream protected_bits;    // Alice -> Shor encode -> channel -> Bob
    BitStream unprotected_bits;  // DumbAlice -> channel -> DumbBob
    std::vector<CorruptionEvent> corruption_protected;
    std::vector<CorruptionEvent> corruption_unprotected;
    ProtocolReport report;
};

/// Each message bit rides one 9-qubit system as a sigma_z eigenstate. Both
/// conduits corrupt one uniformly chosen qubit per group with a Haar-random
/// unitary, derived from the same seed so the two paths face the identical
/// channel; only the protected path survives it.
ShorResult run_shor_demo(const BitStream& message, std::uint64_t seed,
                         const ShorOptions& opts = {});

}  // namespace qnet
