#pragma once

// Integral representation of the normalized second-order design:
//   z^2 - 4z + 6 - e^{-z}(2z + 6) = z^4 * int_0^1 t (t-1)^2 e^{-zt} dt.

#include <cmath>
#include <stdexcept>

#include "midspec/quadrature.hpp"
#include "midspec/quasipolynomial.hpp"

namespace midspec {

/// The normalized quasipolynomial with a quadruple root at 0.
inline Quasipolynomial standard_second_order() {
    return Quasipolynomial({{0.0, Polynomial{6.0, -4.0, 1.0}}, {1.0, Polynomial{-6.0, -2.0}}});
}

/// int_0^1 t (t-1)^2 e^{-zt} dt by adaptive Gauss-Kronrod to absolute tol.
inline complex factorization_kernel(complex z, double tol = 1e-12) {
    auto f = [z](double t) { return complex(t * (t - 1.0) * (t - 1.0)) * std::exp(-z * t); };
    quadrature::Options opt;
    opt.abs_tol = tol;
    const auto r = quadrature::integrate<complex>(f, 0.0, 1.0, opt);
    if (!r.converged) throw std::runtime_error("factorization_kernel: quadrature did not converge");
    return r.value;
}

/// |Delta_hat(z) - z^4 * kernel(z)|. The kernel tolerance is tightened by
/// |z|^4 so the quadrature error stays below 1e-12 after the multiplication.
inline double factorization_residual_n2(complex z) {
    if (z == complex(0.0, 0.0)) throw std::invalid_argument("factorization_residual_n2: z must be nonzero");
    const double z4 = std::pow(std::abs(z), 4.0);
    const complex integral = factorization_kernel(z, 1e-12 / std::max(1.0, z4));
    return std::abs(standard_second_order().evaluate(z) - z * z * z * z * integral);
}

}  // namespace midspec
