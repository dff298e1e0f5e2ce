#pragma once

// A priori bounds on |Im z| for roots z of det(zI - A0 - A1 e^{-z}) with
// Re z >= sigma_min.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "midspec/companion.hpp"

namespace midspec {

enum class BoundMethod { SpectralRadiusCurve, NormPower, MoriKokame, TissirHmamed, Lemma3Analytic };
enum class MatrixNorm { One, Two, Frobenius, Infinity, None };

inline std::string_view to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::SpectralRadiusCurve: return "rho";
        case BoundMethod::NormPower: return "norm-power";
        case BoundMethod::MoriKokame: return "mori-kokame";
        case BoundMethod::TissirHmamed: return "tissir-hmamed";
        case BoundMethod::Lemma3Analytic: return "lemma3";
    }
    return "?";
}

inline std::string_view to_string(MatrixNorm n) {
    switch (n) {
        case MatrixNorm::One: return "one";
        case MatrixNorm::Two: return "two";
        case MatrixNorm::Frobenius: return "frobenius";
        case MatrixNorm::Infinity: return "infinity";
        case MatrixNorm::None: return "none";
    }
    return "?";
}

inline std::optional<BoundMethod> parse_bound_method(std::string_view s) {
    for (auto m : {BoundMethod::SpectralRadiusCurve, BoundMethod::NormPower, BoundMethod::MoriKokame,
                   BoundMethod::TissirHmamed, BoundMethod::Lemma3Analytic})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

inline std::optional<MatrixNorm> parse_matrix_norm(std::string_view s) {
    if (s == "1") return MatrixNorm::One;
    if (s == "2") return MatrixNorm::Two;
    if (s == "inf") return MatrixNorm::Infinity;
    if (s == "fro") return MatrixNorm::Frobenius;
    for (auto n : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Frobenius, MatrixNorm::Infinity, MatrixNorm::None})
        if (to_string(n) == s) return n;
    return std::nullopt;
}

struct BoundReport {
    BoundMethod method = BoundMethod::NormPower;
    MatrixNorm norm = MatrixNorm::None;
    std::size_t power = 1;
    double sigma_min = 0.0;
    double value = 0.0;
    std::string label;  // distinguishes the rows of a multi-value method
};

// ---------------------------------------------------------------------------
// Norms

inline double matrix_norm(const ComplexMatrix& m, MatrixNorm norm) {
    switch (norm) {
        case MatrixNorm::One: return m.cwiseAbs().colwise().sum().maxCoeff();
        case MatrixNorm::Infinity: return m.cwiseAbs().rowwise().sum().maxCoeff();
        case MatrixNorm::Frobenius: return m.norm();
        case MatrixNorm::Two: {
            if (m.size() == 0) return 0.0;
            Eigen::JacobiSVD<ComplexMatrix> svd(m);
            return svd.singularValues()(0);
        }
        case MatrixNorm::None: break;
    }
    throw std::invalid_argument("matrix_norm: a concrete norm is required");
}

inline double matrix_norm(const RealMatrix& m, MatrixNorm norm) { return matrix_norm(ComplexMatrix(m.cast<complex>()), norm); }

inline void require_induced(MatrixNorm norm, const char* where) {
    if (norm == MatrixNorm::Frobenius)
        throw std::invalid_argument(std::string(where) + ": the Frobenius norm is not induced by a vector norm");
    if (norm == MatrixNorm::None) throw std::invalid_argument(std::string(where) + ": a norm is required");
}

/// Logarithmic norm mu(M) = lim (|I + eps M| - 1) / eps, by its closed forms.
inline double log_norm(const ComplexMatrix& m, MatrixNorm norm) {
    require_induced(norm, "log_norm");
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;
    switch (norm) {
        case MatrixNorm::One:
        case MatrixNorm::Infinity: {
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                double acc = m(i, i).real();
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (j == i) continue;
                    acc += norm == MatrixNorm::One ? std::abs(m(j, i)) : std::abs(m(i, j));
                }
                best = std::max(best, acc);
            }
            return best;
        }
        case MatrixNorm::Two: {
            const ComplexMatrix h = 0.5 * (m + m.adjoint());
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
            return es.eigenvalues().maxCoeff();
        }
        default: break;
    }
    throw std::invalid_argument("log_norm: unsupported norm");
}

inline double spectral_radius(const ComplexMatrix& m) {
    const Eigen::Index n = m.rows();
    if (n == 1) return std::abs(m(0, 0));
    if (n == 2) {
        const complex half_trace = 0.5 * (m(0, 0) + m(1, 1));
        const complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        const complex root = std::sqrt(half_trace * half_trace - det);
        return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Closed-form bounds

/// |Im z| <= mu(-i A0) + |A1|.
inline BoundReport bound_mori_kokame(const CompanionPair& pair, MatrixNorm norm) {
    require_induced(norm, "bound_mori_kokame");
    const ComplexMatrix a0 = complex(0.0, -1.0) * pair.A0.cast<complex>();
    const double value = log_norm(a0, norm) + matrix_norm(pair.A1, norm);
    return {BoundMethod::MoriKokame, norm, 1, 0.0, std::max(0.0, value)};
}

/// |Im z| <= mu(-i A0) + max over theta of mu(A1 e^{i theta}); the maximum is
/// taken on a 720-point grid and refined by golden-section search.
inline BoundReport bound_tissir_hmamed(const CompanionPair& pair, MatrixNorm norm) {
    require_induced(norm, "bound_tissir_hmamed");
    const ComplexMatrix a1 = pair.A1.cast<complex>();
    auto rotated = [&](double theta) { return log_norm(ComplexMatrix(a1 * std::polar(1.0, theta)), norm); };

    constexpr int kGrid = 720;
    const double h = 2.0 * std::numbers::pi / kGrid;
    int best_i = 0;
    double best = rotated(0.0);
    for (int i = 1; i < kGrid; ++i) {
        const double v = rotated(i * h);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    double lo = (best_i - 1) * h, hi = (best_i + 1) * h;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = rotated(x1), f2 = rotated(x2);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = rotated(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = rotated(x1);
        }
    }
    best = std::max({best, f1, f2});

    const ComplexMatrix a0 = complex(0.0, -1.0) * pair.A0.cast<complex>();
    return {BoundMethod::TissirHmamed, norm, 1, 0.0, std::max(0.0, log_norm(a0, norm) + best)};
}

// ---------------------------------------------------------------------------
// Feasible-set bounds: sup |Im z| over {Re z >= sigma_min, |z| <= F(z)}

struct FeasibilityScan {
    double omega_step = 0.01;     // coarse downward scan in omega
    double omega_tol = 1e-6;      // bisection on the boundary
    double sigma_step = 0.01;     // coarse scan in sigma
    double sigma_fine = 1e-4;     // refinement around the coarse maximiser
    std::size_t tail_steps = 100; // consecutive envelope-below-best steps before stopping
};

struct BoundaryPoint {
    double sigma = 0.0;
    double omega = 0.0;  // largest feasible omega at sigma; NaN when none
};

namespace detail {

// F(z) for the feasibility test; `envelope_norm` bounds F by |A0| + |A1| e^{-sigma}.
class Feasibility {
public:
    Feasibility(const CompanionPair& pair, BoundMethod method, MatrixNorm norm, std::size_t power)
        : pair_(pair), method_(method), norm_(norm), power_(power) {
        if (method == BoundMethod::SpectralRadiusCurve) {
            // rho is below every induced norm, and below the Cauchy radius in companion form
            for (auto n : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Infinity})
                norms_.emplace_back(matrix_norm(pair.A0, n), matrix_norm(pair.A1, n));
            if (is_companion(pair)) {
                const Eigen::Index n = pair.order();
                for (Eigen::Index k = 0; k < n; ++k) {
                    row0_.push_back(std::abs(pair.A0(n - 1, k)));
                    row1_.push_back(std::abs(pair.A1(n - 1, k)));
                }
            }
        } else {
            norms_.emplace_back(matrix_norm(pair.A0, norm), matrix_norm(pair.A1, norm));
        }
    }

    static bool is_companion(const CompanionPair& p) {
        const Eigen::Index n = p.order();
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (p.A0(i, j) != (j == i + 1 ? 1.0 : 0.0) || p.A1(i, j) != 0.0) return false;
        return true;
    }

    [[nodiscard]] double bound_at(complex z) const {
        const ComplexMatrix m = pair_.at(z);
        if (method_ == BoundMethod::SpectralRadiusCurve) return spectral_radius(m);
        ComplexMatrix p = m;
        for (std::size_t k = 1; k < power_; ++k) p = p * m;
        return std::pow(matrix_norm(p, norm_), 1.0 / static_cast<double>(power_));
    }

    [[nodiscard]] double slack(double sigma, double omega) const {
        const complex z{sigma, omega};
        return bound_at(z) - std::abs(z);
    }

    /// Upper bound on F(z) over Re z = sigma.
    [[nodiscard]] double magnitude_cap(double sigma) const {
        const double d = std::exp(-sigma);
        double e = std::numeric_limits<double>::infinity();
        for (const auto& [n0, n1] : norms_) e = std::min(e, n0 + n1 * d);
        if (!row0_.empty()) e = std::min(e, monic_cauchy_radius(sigma));
        return e;
    }

    /// Largest |omega| compatible with |z| <= magnitude_cap(sigma).
    [[nodiscard]] double envelope(double sigma) const {
        const double e = magnitude_cap(sigma);
        return e > std::abs(sigma) ? std::sqrt(e * e - sigma * sigma) : 0.0;
    }

    [[nodiscard]] std::optional<double> boundary(double sigma, const FeasibilityScan& scan) const {
        double hi = envelope(sigma);
        if (hi <= 0.0) return slack(sigma, 0.0) >= 0.0 ? std::optional<double>(0.0) : std::nullopt;
        // hi is infeasible unless the envelope is attained; scan downward
        for (double w = hi - scan.omega_step;; w -= scan.omega_step) {
            const double wc = std::max(w, 0.0);
            if (slack(sigma, wc) >= 0.0) {
                double lo = wc;
                while (hi - lo > scan.omega_tol) {
                    const double mid = 0.5 * (lo + hi);
                    (slack(sigma, mid) >= 0.0 ? lo : hi) = mid;
                }
                return lo;
            }
            hi = wc;
            if (wc == 0.0) return std::nullopt;
        }
    }

private:
    const CompanionPair& pair_;
    BoundMethod method_;
    MatrixNorm norm_;
    std::size_t power_;
    std::vector<std::pair<double, double>> norms_;
    std::vector<double> row0_, row1_;

    // positive root of x^n - sum_k (|r0_k| + |r1_k| e^{-sigma}) x^k
    [[nodiscard]] double monic_cauchy_radius(double sigma) const {
        const double d = std::exp(-sigma);
        const std::size_t n = row0_.size();
        auto f = [&](double x) {
            double acc = 0.0, xp = 1.0;
            for (std::size_t k = 0; k < n; ++k, xp *= x) acc += (row0_[k] + row1_[k] * d) * xp;
            return xp - acc;
        };
        double hi = 1.0;
        while (f(hi) <= 0.0) hi *= 2.0;
        double lo = 0.0;
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? hi : lo) = mid;
        }
        return hi;
    }
};

inline double feasible_sup(const Feasibility& f, double sigma_min, const FeasibilityScan& scan) {
    double best = 0.0, best_sigma = sigma_min;
    bool any = false;
    std::size_t below = 0;
    for (double sigma = sigma_min;; sigma += scan.sigma_step) {
        if (f.envelope(sigma) <= best && any) {
            if (++below >= scan.tail_steps) break;
            continue;
        }
        below = 0;
        if (auto w = f.boundary(sigma, scan); w && (!any || *w > best)) {
            best = *w;
            best_sigma = sigma;
            any = true;
        }
        if (f.envelope(sigma) == 0.0 && sigma > 0.0) break;
    }
    const double lo = std::max(sigma_min, best_sigma - scan.sigma_step);
    const double hi = best_sigma + scan.sigma_step;
    for (double sigma = lo; sigma <= hi + 1e-15; sigma += scan.sigma_fine) {
        if (auto w = f.boundary(sigma, scan); w && *w > best) best = *w;
    }
    return best;
}

}  // namespace detail

/// sup |Im z| subject to Re z >= sigma_min and |z|^power <= |(A0 + A1 e^{-z})^power|.
inline BoundReport bound_norm_power(const CompanionPair& pair, MatrixNorm norm, std::size_t power, double sigma_min,
                                    const FeasibilityScan& scan = {}) {
    if (power == 0) throw std::invalid_argument("bound_norm_power: power must be at least 1");
    if (norm == MatrixNorm::None) throw std::invalid_argument("bound_norm_power: a norm is required");
    const detail::Feasibility f(pair, BoundMethod::NormPower, norm, power);
    return {BoundMethod::NormPower, norm, power, sigma_min, detail::feasible_sup(f, sigma_min, scan)};
}

/// sup |Im z| subject to Re z >= sigma_min and |z| <= rho(A0 + A1 e^{-z}).
inline BoundReport bound_spectral_radius_curve(const CompanionPair& pair, double sigma_min,
                                               const FeasibilityScan& scan = {}) {
    const detail::Feasibility f(pair, BoundMethod::SpectralRadiusCurve, MatrixNorm::None, 1);
    return {BoundMethod::SpectralRadiusCurve, MatrixNorm::None, 1, sigma_min, detail::feasible_sup(f, sigma_min, scan)};
}

/// Upper boundary of the feasible set, sampled on [sigma_from, sigma_to].
inline std::vector<BoundaryPoint> boundary_curve(const CompanionPair& pair, BoundMethod method, MatrixNorm norm,
                                                 std::size_t power, double sigma_from, double sigma_to, double step,
                                                 const FeasibilityScan& scan = {}) {
    if (method != BoundMethod::SpectralRadiusCurve && method != BoundMethod::NormPower)
        throw std::invalid_argument("boundary_curve: only rho and norm-power define a feasible set");
    if (!(step > 0.0)) throw std::invalid_argument("boundary_curve: step must be positive");
    const detail::Feasibility f(pair, method, norm, power);
    std::vector<BoundaryPoint> out;
    const auto count = static_cast<std::size_t>(std::floor((sigma_to - sigma_from) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        const double sigma = sigma_from + static_cast<double>(i) * step;
        const auto w = f.boundary(sigma, scan);
        out.push_back({sigma, w ? *w : std::numeric_limits<double>::quiet_NaN()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hand-derived chain for the normalized second-order pair

struct Lemma3Chain {
    double coarse = 0.0;          // max over sigma >= 0 of the discriminant bound, to the 1/4
    double coarse_closed_form = 0.0;  // (64190/31)^{1/4}
    double cos_lower = 0.0;       // lower bound of cos(omega) on [2 pi, 6.75]
    double refinement = 0.0;      // fourth root of the refined bound on [2 pi, 6.75]
    double excluded_lo = 0.0;     // [2 pi, coarse] contains no root
    double excluded_hi = 0.0;
    double certified = 0.0;       // |Im z| < certified for roots with Re z >= 0
};

/// Reproduces the two-step argument giving |Im z| < 2 pi on the closed right
/// half-plane. Only meaningful for the normalized second-order pair, whose
/// squared-Frobenius expansion carries the constants used below.
inline Lemma3Chain lemma3_analytic_bound(bool pair_is_standard) {
    if (!pair_is_standard)
        throw std::invalid_argument("lemma3_analytic_bound: constants are specific to the standard second-order pair");

    // ||(A0 + A1 e^{-z})^2||_F^2 = -992 x c^2 + (464 x - 192) e^{-sigma} c + 728 + 1164 x + 160 x^2,
    // x = e^{-2 sigma}, c = cos(omega). Negative leading coefficient in
    // e^{-sigma} c, so feasibility needs a nonnegative discriminant.
    auto discriminant_bound = [](double x) {
        const double lin = 464.0 * x - 192.0;
        return 728.0 + 1164.0 * x + 160.0 * x * x + lin * lin / 3968.0;
    };
    // x ranges over (0, 1] for sigma >= 0
    double top = discriminant_bound(1.0);
    for (int i = 0; i <= 10000; ++i) top = std::max(top, discriminant_bound(i / 10000.0));

    Lemma3Chain out;
    out.coarse = std::pow(top, 0.25);
    out.coarse_closed_form = std::pow(64190.0 / 31.0, 0.25);

    // On [2 pi, 6.75], cos is decreasing from 1; cos(6.75) = 0.89300... > 0.893.
    out.cos_lower = 0.893;
    auto refined_bound = [c = out.cos_lower](double x) {
        // -992 x c^2 with c^2 > 0.893^2, |464 x - 192| <= 272, e^{-sigma} |c| <= 1
        return -992.0 * x * c * c + 272.0 + 728.0 + 1164.0 * x + 160.0 * x * x;
    };
    double refined = refined_bound(1.0);
    for (int i = 0; i <= 10000; ++i) refined = std::max(refined, refined_bound(i / 10000.0));
    out.refinement = std::pow(refined, 0.25);
    out.excluded_lo = 2.0 * std::numbers::pi;
    out.excluded_hi = out.coarse;
    out.certified = out.refinement < 2.0 * std::numbers::pi ? 2.0 * std::numbers::pi : out.coarse;
    return out;
}

/// The chain as report rows: coarse, refinement, excluded interval ends, certified bound.
inline std::vector<BoundReport> lemma3_rows(const Lemma3Chain& c) {
    auto row = [](const char* label, double v) {
        BoundReport r{BoundMethod::Lemma3Analytic, MatrixNorm::None, 1, 0.0, v};
        r.label = label;
        return r;
    };
    return {row("coarse", c.coarse), row("refinement", c.refinement), row("excluded-lo", c.excluded_lo),
            row("excluded-hi", c.excluded_hi), row("certified", c.certified)};
}

/// Tables of bounds for a pair: rho, norm-power with powers 1 and 2 in the
/// one/Frobenius/infinity norms, and Mori-Kokame and Tissir-Hmamed in the
/// one/two/infinity norms.
inline std::vector<BoundReport> bound_suite(const CompanionPair& pair, double sigma_min = 0.0) {
    std::vector<BoundReport> out{bound_spectral_radius_curve(pair, sigma_min)};
    for (std::size_t p : {1u, 2u})
        for (auto n : {MatrixNorm::One, MatrixNorm::Frobenius, MatrixNorm::Infinity})
            out.push_back(bound_norm_power(pair, n, p, sigma_min));
    for (auto n : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Infinity}) out.push_back(bound_mori_kokame(pair, n));
    for (auto n : {MatrixNorm::One, MatrixNorm::Two, MatrixNorm::Infinity}) out.push_back(bound_tissir_hmamed(pair, n));
    return out;
}

}  // namespace midspec
