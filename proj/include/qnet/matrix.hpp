#pragma once

#include <cstddef>
#include <vector>

#include "qnet/types.hpp"

namespace qnet {

/// Dense row-major complex matrix, used for gate bases and expanded operators.
struct Unitary {
    std::size_t dim = 0;
    std::vector<cdouble> m;

    Unitary() = default;
    explicit Unitary(std::size_t d) : dim(d), m(d * d, cdouble(0)) {}

    cdouble& at(std::size_t r, std::size_t c) { return m[r * dim + c]; }
    const cdouble& at(std::size_t r, std::size_t c) const { return m[r * dim + c]; }
};

inline Unitary identity_matrix(std::size_t dim) {
    Unitary u(dim);
    for (std::size_t i = 0; i < dim; ++i) u.at(i, i) = 1.0;
    return u;
}

inline Unitary matmul(const Unitary& a, const Unitary& b) {
    Unitary out(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t k = 0; k < a.dim; ++k) {
            const cdouble f = a.at(i, k);
            if (f == cdouble(0)) continue;
            for (std::size_t j = 0; j < a.dim; ++j) out.at(i, j) += f * b.at(k, j);
        }
    return out;
}

/// max |(U U^dagger - I)_{ij}|
inline double max_unitarity_deviation(const Unitary& u) {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.dim; ++i)
        for (std::size_t j = 0; j < u.dim; ++j) {
            cdouble acc = 0.0;
            for (std::size_t k = 0; k < u.dim; ++k) acc += u.at(i, k) * std::conj(u.at(j, k));
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    return worst;
}

}  // namespace qnet
