#pragma once

// Single-delay retarded equations
//   y^(n)(t) + sum_k a_k y^(k)(t) + sum_k alpha_k y^(k)(t - tau) = 0
// and their characteristic quasipolynomials.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "midspec/quasipolynomial.hpp"

namespace midspec {

struct RetardedSystem {
    std::size_t n = 1;
    std::vector<double> a;      // a_0 .. a_{n-1}
    std::vector<double> alpha;  // alpha_0 .. alpha_{n-1}
    double tau = 1.0;

    void validate() const {
        if (n < 1) throw std::invalid_argument("system order n must be at least 1");
        if (a.size() != n || alpha.size() != n)
            throw std::invalid_argument("coefficient lists must have exactly n = " + std::to_string(n) + " entries");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("delay tau must be positive");
    }

    friend bool operator==(const RetardedSystem&, const RetardedSystem&) = default;
};

/// The system after z = tau (s - s0) and multiplication by tau^n: delay 1, shift 0.
struct NormalizedSystem {
    std::size_t n = 1;
    std::vector<double> b;
    std::vector<double> beta;

    friend bool operator==(const NormalizedSystem&, const NormalizedSystem&) = default;
};

namespace detail {

inline Quasipolynomial two_term(std::size_t n, const std::vector<double>& lower,
                                const std::vector<double>& delayed, double delay) {
    std::vector<double> monic(lower.begin(), lower.end());
    monic.resize(n + 1, 0.0);
    monic[n] = 1.0;
    return Quasipolynomial({Term{0.0, Polynomial(std::move(monic))}, Term{delay, Polynomial(delayed)}});
}

inline constexpr std::size_t kExactOrderLimit = 10;

// Pascal triangle, exact in 64-bit integers for every entry used by the
// exact synthesis path (rows up to 2 * kExactOrderLimit).
inline constexpr auto kPascal = [] {
    std::array<std::array<std::int64_t, 2 * kExactOrderLimit + 1>, 2 * kExactOrderLimit + 1> t{};
    for (std::size_t r = 0; r < t.size(); ++r) {
        t[r][0] = 1;
        for (std::size_t c = 1; c <= r; ++c) t[r][c] = t[r - 1][c - 1] + (c <= r - 1 ? t[r - 1][c] : 0);
    }
    return t;
}();

inline double binomial(std::size_t r, std::size_t c) {
    if (c > r) return 0.0;
    if (r < kPascal.size()) return static_cast<double>(kPascal[r][c]);
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= c; ++i) acc = acc * static_cast<long double>(r - c + i) / static_cast<long double>(i);
    return static_cast<double>(std::round(acc));
}

// (n-1)! / j! for j <= n - 1, and n! / j! for j <= n.
template <class T>
T falling(std::size_t top, std::size_t bottom) {
    T acc = 1;
    for (std::size_t i = bottom + 1; i <= top; ++i) acc *= static_cast<T>(i);
    return acc;
}

// Integer weights of the maximal-multiplicity formulas:
//   delay-free: binom(j,k) binom(2n-j-1,n-1) n!/j!
//   delayed:    binom(j,k) binom(2n-j-1,n-1) (n-j) (n-1)!/j!
//             = (2n-j-1)! / (k! (j-k)! (n-j-1)!)
template <class T>
T free_weight(std::size_t n, std::size_t j, std::size_t k) {
    if constexpr (std::is_integral_v<T>) {
        return kPascal[j][k] * kPascal[2 * n - j - 1][n - 1] * falling<T>(n, j);
    } else {
        return static_cast<T>(binomial(j, k)) * static_cast<T>(binomial(2 * n - j - 1, n - 1)) * falling<T>(n, j);
    }
}

template <class T>
T delayed_weight(std::size_t n, std::size_t j, std::size_t k) {
    if constexpr (std::is_integral_v<T>) {
        return kPascal[j][k] * kPascal[2 * n - j - 1][n - 1] * static_cast<T>(n - j) * falling<T>(n - 1, j);
    } else {
        return static_cast<T>(binomial(j, k)) * static_cast<T>(binomial(2 * n - j - 1, n - 1)) *
               static_cast<T>(n - j) * falling<T>(n - 1, j);
    }
}

template <class Weight>
RetardedSystem synthesize(std::size_t n, double s0, double tau) {
    RetardedSystem sys{n, std::vector<double>(n), std::vector<double>(n), tau};
    const double growth = std::exp(s0 * tau);
    const double sign_n1 = (n - 1) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double sign_nk = (n - k) % 2 == 0 ? 1.0 : -1.0;
        double free_sum = 0.0;
        double delayed_sum = 0.0;
        for (std::size_t j = k; j < n; ++j) {
            const double power = std::pow(s0, static_cast<double>(j - k)) / std::pow(tau, static_cast<double>(n - j));
            const double sign_jk = (j - k) % 2 == 0 ? 1.0 : -1.0;
            free_sum += static_cast<double>(free_weight<Weight>(n, j, k)) * power;
            delayed_sum += sign_jk * static_cast<double>(delayed_weight<Weight>(n, j, k)) * power;
        }
        sys.a[k] = binomial(n, k) * std::pow(-s0, static_cast<double>(n - k)) + sign_nk * free_sum;
        sys.alpha[k] = sign_n1 * growth * delayed_sum;
    }
    return sys;
}

inline void require_positive_delay(double tau, const char* where) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument(std::string(where) + ": tau must be positive");
}

}  // namespace detail

/// Characteristic function s^n + sum a_k s^k + exp(-tau s) sum alpha_k s^k.
inline Quasipolynomial to_quasipolynomial(const RetardedSystem& sys) {
    sys.validate();
    return detail::two_term(sys.n, sys.a, sys.alpha, sys.tau);
}

inline Quasipolynomial to_quasipolynomial(const NormalizedSystem& sys) {
    return detail::two_term(sys.n, sys.b, sys.beta, 1.0);
}

/// Coefficients placing s0 as a root of multiplicity 2n for delay tau.
///
/// Integer weights are formed exactly for n <= 10 and in extended precision
/// above that; only the final scaling by powers of s0 and tau is inexact.
inline RetardedSystem mid_coefficients(std::size_t n, double s0, double tau) {
    detail::require_positive_delay(tau, "mid_coefficients");
    if (n < 1) throw std::invalid_argument("mid_coefficients: n must be at least 1");
    if (n <= detail::kExactOrderLimit) return detail::synthesize<std::int64_t>(n, s0, tau);
    return detail::synthesize<long double>(n, s0, tau);
}

/// Closed-form second-order design, kept separate from the general formula
/// so the two can be checked against each other.
inline RetardedSystem mid_coefficients_order2(double s0, double tau) {
    detail::require_positive_delay(tau, "mid_coefficients_order2");
    const double g = std::exp(s0 * tau);
    const double a1 = -4.0 / tau - 2.0 * s0;
    const double a0 = 6.0 / (tau * tau) + 4.0 / tau * s0 + s0 * s0;
    const double alpha1 = -2.0 / tau * g;
    const double alpha0 = 2.0 / tau * g * (s0 - 3.0 / tau);
    return RetardedSystem{2, {a0, a1}, {alpha0, alpha1}, tau};
}

/// Coefficients of tau^n Delta(s0 + z / tau).
inline NormalizedSystem normalize(const RetardedSystem& sys, double s0) {
    sys.validate();
    const std::size_t n = sys.n;
    const double tau = sys.tau;
    const double shift = std::exp(-s0 * tau);
    NormalizedSystem out{n, std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t m = 0; m < n; ++m) {
        double free_sum = detail::binomial(n, m) * std::pow(s0, static_cast<double>(n - m));
        double delayed_sum = 0.0;
        for (std::size_t k = m; k < n; ++k) {
            const double w = detail::binomial(k, m) * std::pow(s0, static_cast<double>(k - m));
            free_sum += sys.a[k] * w;
            delayed_sum += sys.alpha[k] * w;
        }
        const double scale = std::pow(tau, static_cast<double>(n - m));
        out.b[m] = scale * free_sum;
        out.beta[m] = scale * shift * delayed_sum;
    }
    return out;
}

/// Inverse of normalize for a given shift and delay.
inline RetardedSystem denormalize(const NormalizedSystem& sys, double s0, double tau) {
    detail::require_positive_delay(tau, "denormalize");
    const std::size_t n = sys.n;
    RetardedSystem out{n, std::vector<double>(n), std::vector<double>(n), tau};
    const double growth = std::exp(s0 * tau);
    for (std::size_t k = 0; k < n; ++k) {
        // the monic leading term contributes tau^n binom(n,k) (-s0)^(n-k)
        double free_sum = std::pow(tau, static_cast<double>(n)) * detail::binomial(n, k) *
                          std::pow(-s0, static_cast<double>(n - k));
        double delayed_sum = 0.0;
        for (std::size_t m = k; m < n; ++m) {
            const double w =
                std::pow(tau, static_cast<double>(m)) * detail::binomial(m, k) * std::pow(-s0, static_cast<double>(m - k));
            free_sum += sys.b[m] * w;
            delayed_sum += sys.beta[m] * w;
        }
        const double inv = std::pow(tau, -static_cast<double>(n));
        out.a[k] = inv * free_sum;
        out.alpha[k] = inv * growth * delayed_sum;
    }
    return out;
}

/// s0 = -a_{n-1}/n - n/tau for a maximal-multiplicity design.
inline double dominant_root_from_trace(std::size_t n, double a_top, double tau) {
    detail::require_positive_delay(tau, "dominant_root_from_trace");
    if (n < 1) throw std::invalid_argument("dominant_root_from_trace: n must be at least 1");
    const double nd = static_cast<double>(n);
    return -a_top / nd - nd / tau;
}

}  // namespace midspec
