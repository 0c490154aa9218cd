#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qnet {

using cdouble = std::complex<double>;
using cfloat = std::complex<float>;

/// Component width of the density-matrix storage. Single keeps 32-bit
/// real/imaginary parts (8 bytes per entry), double keeps 64-bit (16 bytes).
enum class Precision { Single, Double };

inline constexpr double kToleranceDouble = 1e-9;
inline constexpr double kToleranceSingle = 1e-4;

inline double tolerance_for(Precision p) {
    return p == Precision::Double ? kToleranceDouble : kToleranceSingle;
}

inline std::size_t entry_bytes(Precision p) {
    return p == Precision::Double ? sizeof(cdouble) : sizeof(cfloat);
}

inline const char* precision_name(Precision p) {
    return p == Precision::Double ? "double" : "single";
}

/// Default cap on qubits per system; 2^24-entry matrices stay desk-scale.
inline constexpr int kDefaultMaxQubits = 12;

/// Below this probability mass a measured state is considered corrupt.
inline constexpr double kCorruptStateThreshold = 1e-12;

/// Vacuum light speed in km/s; channels may override (e.g. fiber group velocity).
inline constexpr double kDefaultSignalSpeedKmPerS = 2.998e5;

/// One transmitted qubit or classical message charges this much simulated time.
inline constexpr double kDefaultPulseNs = 1.0;

/// Simulated time. Kept in nanoseconds so that pulse accounting with the
/// default 1 ns pulse stays exact in double arithmetic.
using TimeNs = double;

inline double to_seconds(TimeNs t) { return t * 1e-9; }

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SizeError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ResourceError : Error { using Error::Error; };
struct RoutingError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct CrossSystemError : Error { using Error::Error; };
struct HolderError : Error { using Error::Error; };
struct BrokenLinkError : Error { using Error::Error; };
struct AbortedError : Error { using Error::Error; };

/// Raised by the simulation supervisor; carries the failing agent's name.
struct RunError : Error {
    explicit RunError(const std::string& agent_name, const std::string& message)
        : Error(message), agent(agent_name) {}
    std::string agent;
};

}  // namespace qnet
