#pragma once

#include <Eigen/Dense>
#include <complex>

#include "midspec/retarded_system.hpp"

namespace midspec {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Matrices with det(zI - A0 - A1 e^{-z}) equal to the normalized
/// characteristic quasipolynomial.
struct CompanionPair {
    RealMatrix A0;
    RealMatrix A1;

    [[nodiscard]] Eigen::Index order() const noexcept { return A0.rows(); }

    /// A0 + A1 e^{-z}.
    [[nodiscard]] ComplexMatrix at(complex z) const {
        return A0.cast<complex>() + A1.cast<complex>() * std::exp(-z);
    }

    /// det(zI - A0 - A1 e^{-z}).
    [[nodiscard]] complex characteristic(complex z) const {
        const Eigen::Index n = order();
        ComplexMatrix m = z * ComplexMatrix::Identity(n, n) - at(z);
        return m.determinant();
    }
};

/// Companion form: ones on the superdiagonal of A0, last rows -b and -beta.
inline CompanionPair companion_pair(const NormalizedSystem& sys) {
    const auto n = static_cast<Eigen::Index>(sys.n);
    CompanionPair pair{RealMatrix::Zero(n, n), RealMatrix::Zero(n, n)};
    for (Eigen::Index i = 0; i + 1 < n; ++i) pair.A0(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        pair.A0(n - 1, j) = -sys.b[static_cast<std::size_t>(j)];
        pair.A1(n - 1, j) = -sys.beta[static_cast<std::size_t>(j)];
    }
    return pair;
}

/// The pair of the normalized quadruple-root design.
inline CompanionPair standard_companion_pair() { return companion_pair(NormalizedSystem{2, {6.0, -4.0}, {-6.0, -2.0}}); }

}  // namespace midspec
