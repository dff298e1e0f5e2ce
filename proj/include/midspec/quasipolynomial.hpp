#pragma once

// Polynomials and quasipolynomials  Q(s) = sum_k p_k(s) exp(-lambda_k s).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace midspec {

using complex = std::complex<double>;

/// Real polynomial; coefficient j multiplies s^j. Trailing zeros are trimmed,
/// so the identically zero polynomial has no coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) { trim(); }
    Polynomial(std::initializer_list<double> coefficients) : coeffs_(coefficients) { trim(); }

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }

    /// Degree of the polynomial; 0 for constants and for the zero polynomial.
    [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

    [[nodiscard]] double operator[](std::size_t j) const noexcept { return j < coeffs_.size() ? coeffs_[j] : 0.0; }

    template <class T>
    [[nodiscard]] T evaluate(const T& s) const {
        T acc{0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + T(*it);
        return acc;
    }

    [[nodiscard]] Polynomial derivative() const {
        if (coeffs_.size() <= 1) return {};
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t j = 1; j < coeffs_.size(); ++j) d[j - 1] = static_cast<double>(j) * coeffs_[j];
        return Polynomial(std::move(d));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
    }

    std::vector<double> coeffs_;
};

/// One exponential term p(s) exp(-delay s).
struct Term {
    double delay = 0.0;
    Polynomial poly;

    friend bool operator==(const Term&, const Term&) = default;
};

/// A finite sum of exponential-polynomial terms with pairwise distinct delays.
///
/// Terms are kept sorted by ascending delay and zero polynomials are dropped,
/// so two quasipolynomials compare equal iff their canonical forms agree.
class Quasipolynomial {
public:
    Quasipolynomial() = default;

    explicit Quasipolynomial(std::vector<Term> terms) : terms_(std::move(terms)) {
        std::erase_if(terms_, [](const Term& t) { return t.poly.is_zero(); });
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.delay < b.delay; });
        for (std::size_t k = 1; k < terms_.size(); ++k) {
            if (terms_[k].delay == terms_[k - 1].delay)
                throw std::invalid_argument("quasipolynomial delays must be pairwise distinct");
        }
    }

    static Quasipolynomial polynomial(Polynomial p) { return Quasipolynomial({Term{0.0, std::move(p)}}); }

    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    /// D = l + sum_k d_k with l + 1 the number of (nonzero) terms.
    [[nodiscard]] std::size_t degree() const noexcept {
        if (terms_.empty()) return 0;
        std::size_t d = terms_.size() - 1;
        for (const auto& t : terms_) d += t.poly.degree();
        return d;
    }

    [[nodiscard]] complex operator()(complex s) const { return evaluate(s); }

    [[nodiscard]] complex evaluate(complex s) const {
        complex acc{0.0, 0.0};
        for (const auto& t : terms_) {
            const complex p = t.poly.evaluate(s);
            acc += t.delay == 0.0 ? p : p * std::exp(-t.delay * s);
        }
        return acc;
    }

    /// Sum of the moduli of every monomial-times-exponential contribution at s.
    /// Used as the natural floating-point scale of evaluate(s).
    [[nodiscard]] double magnitude_scale(complex s) const {
        const double r = std::abs(s);
        double acc = 0.0;
        for (const auto& t : terms_) {
            double pa = 0.0;
            const auto& c = t.poly.coefficients();
            for (auto it = c.rbegin(); it != c.rend(); ++it) pa = pa * r + std::abs(*it);
            acc += pa * std::exp(-t.delay * s.real());
        }
        return acc;
    }

    /// d/ds of (p, lambda) is (p' - lambda p, lambda).
    [[nodiscard]] Quasipolynomial derivative() const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) out.push_back({t.delay, differentiate_term(t.poly, t.delay)});
        return Quasipolynomial(std::move(out));
    }

    [[nodiscard]] Quasipolynomial derivative(std::size_t k) const {
        Quasipolynomial q = *this;
        for (std::size_t i = 0; i < k; ++i) q = q.derivative();
        return q;
    }

    friend bool operator==(const Quasipolynomial&, const Quasipolynomial&) = default;

private:
    static Polynomial differentiate_term(const Polynomial& p, double delay) {
        const auto& c = p.coefficients();
        std::vector<double> d(c.size(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            d[j] = -delay * c[j];
            if (j + 1 < c.size()) d[j] += static_cast<double>(j + 1) * c[j + 1];
        }
        return Polynomial(std::move(d));
    }

    std::vector<Term> terms_;
};

namespace detail {

// Coefficient-wise absolute majorant of a derivative chain: differentiating
// with |.| on every operation bounds the rounding scale of the k-th derivative.
inline std::vector<Term> majorant_derivative(const std::vector<Term>& terms) {
    std::vector<Term> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        const auto& c = t.poly.coefficients();
        std::vector<double> d(c.size(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            d[j] = std::abs(t.delay) * std::abs(c[j]);
            if (j + 1 < c.size()) d[j] += static_cast<double>(j + 1) * std::abs(c[j + 1]);
        }
        out.push_back({t.delay, Polynomial(std::move(d))});
    }
    return out;
}

inline std::vector<Term> absolute_terms(const std::vector<Term>& terms) {
    std::vector<Term> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        std::vector<double> c = t.poly.coefficients();
        for (auto& x : c) x = std::abs(x);
        out.push_back({t.delay, Polynomial(std::move(c))});
    }
    return out;
}

inline double majorant_value(const std::vector<Term>& terms, complex s) {
    const double r = std::abs(s);
    double acc = 0.0;
    for (const auto& t : terms) acc += t.poly.evaluate(r) * std::exp(-t.delay * s.real());
    return acc;
}

}  // namespace detail

/// Residual of the k-th derivative at s together with its rounding scale.
struct DerivativeResidual {
    std::size_t order = 0;
    double modulus = 0.0;
    double scale = 0.0;
};

/// |q^(k)(s)| and the absolute-value majorant of every contribution to it,
/// for k = 0 .. max_order.
inline std::vector<DerivativeResidual> derivative_residuals(const Quasipolynomial& q, complex s,
                                                            std::size_t max_order) {
    std::vector<DerivativeResidual> out;
    out.reserve(max_order + 1);
    Quasipolynomial d = q;
    std::vector<Term> major = detail::absolute_terms(q.terms());
    for (std::size_t k = 0; k <= max_order; ++k) {
        out.push_back({k, std::abs(d.evaluate(s)), detail::majorant_value(major, s)});
        d = d.derivative();
        major = detail::majorant_derivative(major);
    }
    return out;
}

/// Multiplicity of s0 as a root of q, decided by relative residuals: the
/// largest m with |q^(k)(s0)| <= tol * scale_k for every k < m. Never exceeds
/// the degree of q.
inline std::size_t multiplicity_at(const Quasipolynomial& q, complex s0, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("multiplicity_at: tol must be positive");
    if (q.is_zero()) return 0;
    const std::size_t cap = q.degree();
    const auto res = derivative_residuals(q, s0, cap);
    std::size_t m = 0;
    while (m < cap && res[m].modulus <= tol * res[m].scale) ++m;
    return m;
}

}  // namespace midspec
