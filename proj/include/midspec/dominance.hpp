#pragma once

// Certification that the designed multiple root s0 is strictly dominant.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "midspec/bounds.hpp"
#include "midspec/companion.hpp"
#include "midspec/retarded_system.hpp"
#include "midspec/root_finding.hpp"

namespace midspec {

/// Root finding in the search strip failed, so no verdict can be given.
class InconclusiveError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct SpectrumReport {
    std::vector<Root> roots;
    Rectangle region;
    double spectral_abscissa = 0.0;
    std::optional<Root> dominant;
    bool strictly_dominant = false;
};

struct DominanceOptions {
    /// Extra width added around the bounded strip so s0 and the bound never sit on the contour.
    double margin = 0.25;
    RootFinderOptions finder{};
    double tol = 1e-10;
};

/// Largest real root of x^n - sum c_k x^k with c_k >= 0, found by bisection.
inline double cauchy_radius(const std::vector<double>& coeffs) {
    const std::size_t n = coeffs.size();
    auto f = [&](double x) {
        double acc = std::pow(x, static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k) acc -= coeffs[k] * std::pow(x, static_cast<double>(k));
        return acc;
    };
    double hi = 1.0;
    while (f(hi) <= 0.0) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return hi;
}

/// Normalized real part beyond which the monic part dominates every other
/// term, for Re z >= sigma_min.
inline double rightmost_root_cut(const NormalizedSystem& sys, double sigma_min) {
    const double damp = std::exp(std::max(0.0, -sigma_min));
    std::vector<double> c(sys.n);
    for (std::size_t k = 0; k < sys.n; ++k) c[k] = std::abs(sys.b[k]) + damp * std::abs(sys.beta[k]);
    return std::max(1.0, cauchy_radius(c));
}

/// The spectral-radius bound of the normalized pair on Re z >= sigma_min.
inline BoundReport dominance_bound(const NormalizedSystem& sys, double sigma_min) {
    return bound_spectral_radius_curve(companion_pair(sys), sigma_min);
}

/// Searches the normalized rectangle [sigma_min - margin, sigma_max] x
/// [-(B + margin), B + margin], sigma_min = tau (re_floor - s0), and maps the
/// roots back to s = s0 + z / tau. strictly_dominant holds iff the only root
/// with Re s >= s0 is s0 itself with multiplicity 2n.
inline SpectrumReport certify_dominance(const RetardedSystem& sys, double s0, const BoundReport& bound, double re_floor,
                                        const DominanceOptions& opt = {}) {
    sys.validate();
    if (!(re_floor <= s0)) throw std::invalid_argument("certify_dominance: re_floor must not exceed s0");
    const double sigma_min = sys.tau * (re_floor - s0);
    if (bound.sigma_min > sigma_min + 1e-12)
        throw std::invalid_argument("certify_dominance: bound holds only for Re z >= " + std::to_string(bound.sigma_min) +
                                    ", the search needs " + std::to_string(sigma_min));
    if (!(bound.value >= 0.0) || !std::isfinite(bound.value))
        throw std::invalid_argument("certify_dominance: bound value must be finite and nonnegative");

    const NormalizedSystem nsys = normalize(sys, s0);
    const Quasipolynomial q = to_quasipolynomial(nsys);
    const double sigma_max = std::max(rightmost_root_cut(nsys, sigma_min), sigma_min) + opt.margin;
    const double height = bound.value + opt.margin;
    const Rectangle nrect{sigma_min - opt.margin, sigma_max, -height, height};

    std::vector<Root> nroots;
    try {
        nroots = find_roots(q, nrect, opt.tol, opt.finder);
    } catch (const NumericalError& e) {
        throw InconclusiveError(std::string("certify_dominance: root search failed: ") + e.what());
    }
    if (!conjugate_symmetric(nroots, nrect, 1e-6))
        throw InconclusiveError("certify_dominance: located roots are not closed under conjugation");

    const double tau = sys.tau;
    SpectrumReport report;
    report.region = {s0 + nrect.re_min / tau, s0 + nrect.re_max / tau, nrect.im_min / tau, nrect.im_max / tau};
    for (const auto& r : nroots) {
        Root m = r;
        m.location = s0 + r.location / tau;
        report.roots.push_back(m);
    }
    sort_roots(report.roots);

    if (report.roots.empty()) {
        report.spectral_abscissa = -std::numeric_limits<double>::infinity();
        return report;
    }
    report.spectral_abscissa = report.roots.front().location.real();
    const double tie = 1e-9 * std::max(1.0, std::abs(report.spectral_abscissa));
    const auto leaders = std::count_if(report.roots.begin(), report.roots.end(), [&](const Root& r) {
        return report.spectral_abscissa - r.location.real() <= tie;
    });
    const Root& top = report.roots.front();
    if (leaders == 1 && top.location.imag() == 0.0) report.dominant = top;

    // normalized coordinates decide the verdict: roots with Re z >= -eps
    const double eps = 1e-6;
    std::vector<const Root*> right;
    for (const auto& r : nroots)
        if (r.location.real() >= -eps) right.push_back(&r);
    report.strictly_dominant = right.size() == 1 && std::abs(right.front()->location) <= 1e-4 &&
                               right.front()->multiplicity == 2 * sys.n && report.dominant.has_value();
    return report;
}

/// Convenience overload using the spectral-radius bound of the normalized pair.
inline SpectrumReport certify_dominance(const RetardedSystem& sys, double s0, double re_floor,
                                        const DominanceOptions& opt = {}) {
    sys.validate();
    const double sigma_min = sys.tau * (re_floor - s0);
    return certify_dominance(sys, s0, dominance_bound(normalize(sys, s0), sigma_min), re_floor, opt);
}

}  // namespace midspec
