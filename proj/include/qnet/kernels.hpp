#pragma once

#include <atomic>
#include <complex>
#include <cstddef>

#include "qnet/types.hpp"

namespace qnet::kernels {

/// Runtime switches for the dispatching front-ends. The parallel variants pay
/// off only once a matrix is reasonably large; below the threshold the serial
/// reference is used. Tests and the benchmark call the serial/par namespaces
/// directly.
struct ExecConfig {
    std::atomic<bool> force_serial{false};
    std::atomic<std::size_t> parallel_min_dim{256};
};

ExecConfig& exec_config();

// Serial reference implementations. Kept deliberately simple; the parallel
// kernels are validated against these.
namespace serial {

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim);

/// rho <- U rho U^dagger with a dense dim x dim unitary.
template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim);

/// rho <- U rho U^dagger where U is a 2^m x 2^m gate on `targets`, padded
/// with identity on every other qubit. Qubit 0 is the most significant bit.
template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate,
                    int m, const int* targets);

/// tr[rho (|outcome><outcome|)_qubit], accumulated in double.
template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome);

/// Projective collapse: entries outside the outcome block are zeroed exactly,
/// surviving entries are divided by norm.
template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm);

/// Reduced density matrix over `keep` (ascending qubit indices), written to
/// `out` of dimension 2^k.
template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep,
                   int k, std::complex<T>* out);

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim);

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim);

}  // namespace serial

// OpenMP variants; bit-compatible results are not guaranteed (summation
// order differs) but agreement is within the precision tolerance.
namespace par {

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim);

template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim);

template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate,
                    int m, const int* targets);

template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome);

template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm);

template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep,
                   int k, std::complex<T>* out);

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim);

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim);

}  // namespace par

// Dispatching front-ends used by the library.

template <class T>
void zero_state(std::complex<T>* rho, std::size_t dim);

template <class T>
void apply_dense(std::complex<T>* rho, const cdouble* u, std::size_t dim);

template <class T>
void apply_targeted(std::complex<T>* rho, int n_qubits, const cdouble* gate,
                    int m, const int* targets);

template <class T>
double probability(const std::complex<T>* rho, int n_qubits, int qubit, int outcome);

template <class T>
void collapse(std::complex<T>* rho, int n_qubits, int qubit, int outcome, double norm);

template <class T>
void partial_trace(const std::complex<T>* rho, int n_qubits, const int* keep,
                   int k, std::complex<T>* out);

template <class T>
cdouble trace(const std::complex<T>* rho, std::size_t dim);

template <class T>
double hermiticity_deviation(const std::complex<T>* rho, std::size_t dim);

}  // namespace qnet::kernels
