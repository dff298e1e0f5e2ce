#pragma once

// Root counting and localization in rectangles by the argument principle.
//
// The boundary integral of q'/q is accumulated edge by edge with adaptive
// Gauss-Kronrod pieces. A piece is accepted only when its quadrature error is
// small, its argument change is below one radian, and the quadrature agrees
// with the directly evaluated log q(end) - log q(start). The last test catches
// the case where the nodes step over a nearby root without seeing it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "midspec/quadrature.hpp"
#include "midspec/quasipolynomial.hpp"

namespace midspec {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A zero of q lies on (or numerically indistinguishably close to) the contour.
class BoundaryRootError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct Rectangle {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;

    void validate() const {
        if (!(re_min < re_max) || !(im_min < im_max))
            throw std::invalid_argument("rectangle requires re_min < re_max and im_min < im_max");
    }

    [[nodiscard]] double width() const noexcept { return re_max - re_min; }
    [[nodiscard]] double height() const noexcept { return im_max - im_min; }
    [[nodiscard]] double diameter() const noexcept { return std::hypot(width(), height()); }
    [[nodiscard]] complex center() const noexcept { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }

    [[nodiscard]] bool contains(complex z, double slack = 0.0) const noexcept {
        return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
               z.imag() <= im_max + slack;
    }

    [[nodiscard]] Rectangle inflated(double by) const noexcept {
        return {re_min - by, re_max + by, im_min - by, im_max + by};
    }

    static Rectangle square(complex c, double half) {
        return {c.real() - half, c.real() + half, c.imag() - half, c.imag() + half};
    }

    friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

struct Root {
    complex location;
    std::size_t multiplicity = 1;
    double residual = 0.0;
    bool converged = true;
};

struct ContourOptions {
    /// |q| at a contour point below boundary_floor * (rounding scale) counts as a root on the contour.
    double boundary_floor = 1e-10;
    double inflation = 1e-6;
    std::size_t max_inflations = 5;
    /// Allowed distance from the nearest integer before the winding number is rounded.
    double integer_gap = 0.1;
    /// Initial quadrature pieces per unit edge length (at least 4 per edge).
    double pieces_per_unit = 2.0;
    double piece_tol = 1e-9;
    std::size_t max_depth = 48;
};

/// Winding integrals over a rectangle boundary.
struct ContourIntegral {
    complex log_change{};  // int q'/q dz, equal to 2 pi i N
    complex moment{};      // int z q'/q dz, equal to 2 pi i (sum of enclosed roots)
};

struct CountResult {
    long count = 0;
    double winding = 0.0;  // unrounded
    Rectangle rect;        // the contour actually used, after any inflation
    std::size_t inflations = 0;
    complex moment{};
};

namespace detail {

class LogDerivative {
public:
    explicit LogDerivative(const Quasipolynomial& q) : q_(q), dq_(q.derivative()) {}

    struct Sample {
        complex value;
        complex log_derivative;
    };

    [[nodiscard]] Sample at(complex z, double floor) const {
        const complex v = q_.evaluate(z);
        if (std::abs(v) <= floor * q_.magnitude_scale(z))
            throw BoundaryRootError("root on contour near " + std::to_string(z.real()) + "+" +
                                    std::to_string(z.imag()) + "i");
        return {v, dq_.evaluate(z) / v};
    }

    [[nodiscard]] const Quasipolynomial& q() const noexcept { return q_; }
    [[nodiscard]] const Quasipolynomial& dq() const noexcept { return dq_; }

private:
    const Quasipolynomial& q_;
    Quasipolynomial dq_;
};

struct PieceValue {
    complex log_change;
    complex moment;
};

inline double principal_gap(double a, double b) {
    double d = std::remainder(a - b, 2.0 * std::numbers::pi);
    return std::abs(d);
}

inline PieceValue integrate_piece(const LogDerivative& ld, complex p, complex dir, double ta, double tb,
                                  complex qa, complex qb, const ContourOptions& opt, std::size_t depth) {
    const auto seg = [&] {
        auto f = [&](double t) {
            const complex z = p + t * dir;
            const auto s = ld.at(z, opt.boundary_floor);
            const complex g = s.log_derivative * dir;
            return std::pair<complex, complex>{g, z * g};
        };
        // 15-point Kronrod on both integrands at once
        const double c = 0.5 * (ta + tb);
        const double h = 0.5 * (tb - ta);
        auto [g0, m0] = f(c);
        complex kg = g0 * quadrature::detail::kKronrodWeights[7];
        complex km = m0 * quadrature::detail::kKronrodWeights[7];
        complex gg = g0 * quadrature::detail::kGaussWeights[3];
        for (std::size_t i = 0; i < 7; ++i) {
            const double dx = h * quadrature::detail::kKronrodNodes[i];
            auto [g1, m1] = f(c - dx);
            auto [g2, m2] = f(c + dx);
            kg += (g1 + g2) * quadrature::detail::kKronrodWeights[i];
            km += (m1 + m2) * quadrature::detail::kKronrodWeights[i];
            if (i % 2 == 1) gg += (g1 + g2) * quadrature::detail::kGaussWeights[i / 2];
        }
        return std::tuple{kg * h, km * h, std::abs((kg - gg) * h)};
    }();
    const auto& [value, moment, error] = seg;

    const complex ratio = qb / qa;
    const bool small_turn = std::abs(value.imag()) < 1.0;
    const bool arg_ok = principal_gap(value.imag(), std::arg(ratio)) < 1e-6;
    const bool mod_ok = std::abs(value.real() - std::log(std::abs(ratio))) < 1e-6 * std::max(1.0, std::abs(value.real()));
    if (error <= opt.piece_tol && small_turn && arg_ok && mod_ok) return {value, moment};

    // unresolvable argument means the contour runs through the noise ball of a zero
    if (depth >= opt.max_depth) throw BoundaryRootError("contour passes too close to a root to resolve the argument");
    const double tm = 0.5 * (ta + tb);
    const complex qm = ld.at(p + tm * dir, opt.boundary_floor).value;
    const auto left = integrate_piece(ld, p, dir, ta, tm, qa, qm, opt, depth + 1);
    const auto right = integrate_piece(ld, p, dir, tm, tb, qm, qb, opt, depth + 1);
    return {left.log_change + right.log_change, left.moment + right.moment};
}

inline ContourIntegral integrate_edge(const LogDerivative& ld, complex from, complex to, const ContourOptions& opt) {
    const complex dir = to - from;
    const auto pieces = static_cast<std::size_t>(std::max(4.0, std::ceil(std::abs(dir) * opt.pieces_per_unit)));
    ContourIntegral out;
    complex q_prev = ld.at(from, opt.boundary_floor).value;
    for (std::size_t i = 0; i < pieces; ++i) {
        const double ta = static_cast<double>(i) / static_cast<double>(pieces);
        const double tb = static_cast<double>(i + 1) / static_cast<double>(pieces);
        const complex q_next = ld.at(from + tb * dir, opt.boundary_floor).value;
        const auto v = integrate_piece(ld, from, dir, ta, tb, q_prev, q_next, opt, 0);
        out.log_change += v.log_change;
        out.moment += v.moment;
        q_prev = q_next;
    }
    return out;
}

inline ContourIntegral integrate_boundary(const LogDerivative& ld, const Rectangle& r, const ContourOptions& opt) {
    const complex c00{r.re_min, r.im_min}, c10{r.re_max, r.im_min}, c11{r.re_max, r.im_max}, c01{r.re_min, r.im_max};
    ContourIntegral total;
    for (const auto& [a, b] : {std::pair{c00, c10}, std::pair{c10, c11}, std::pair{c11, c01}, std::pair{c01, c00}}) {
        const auto e = integrate_edge(ld, a, b, opt);
        total.log_change += e.log_change;
        total.moment += e.moment;
    }
    return total;
}

inline CountResult count_once(const LogDerivative& ld, const Rectangle& rect, const ContourOptions& opt) {
    const auto integral = integrate_boundary(ld, rect, opt);
    const double winding = integral.log_change.imag() / (2.0 * std::numbers::pi);
    const double nearest = std::round(winding);
    if (std::abs(winding - nearest) > opt.integer_gap)
        throw NumericalError("winding number " + std::to_string(winding) + " is not near an integer");
    return {static_cast<long>(nearest), winding, rect, 0, integral.moment / complex(0.0, 2.0 * std::numbers::pi)};
}

inline CountResult count_with_retries(const LogDerivative& ld, const Rectangle& rect, const ContourOptions& opt) {
    rect.validate();
    Rectangle r = rect;
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            auto out = count_once(ld, r, opt);
            out.inflations = attempt;
            return out;
        } catch (const BoundaryRootError&) {
            if (attempt >= opt.max_inflations) throw;
            r = r.inflated(opt.inflation * std::max(1.0, rect.diameter()));
        }
    }
}

}  // namespace detail

/// Number of zeros of q inside rect counted with multiplicity; the contour is
/// inflated and retried when a zero sits on it.
inline CountResult count_roots_detailed(const Quasipolynomial& q, const Rectangle& rect, const ContourOptions& opt = {}) {
    const detail::LogDerivative ld(q);
    return detail::count_with_retries(ld, rect, opt);
}

inline long count_roots(const Quasipolynomial& q, const Rectangle& rect, const ContourOptions& opt = {}) {
    return count_roots_detailed(q, rect, opt).count;
}

struct RootFinderOptions {
    ContourOptions contour;
    /// Boxes holding several roots stop splitting below this diameter; 0
    /// selects 1e-3 times the search rectangle diameter.
    double cluster_diameter = 0.0;
    std::size_t newton_iterations = 100;
    /// Concurrent subdivision tasks. 1 keeps everything on the calling thread.
    std::size_t threads = 1;
};

namespace detail {

class RootFinder {
public:
    RootFinder(const Quasipolynomial& q, double tol, RootFinderOptions opt, double cluster_diameter)
        : ld_(q), tol_(tol), opt_(std::move(opt)), cluster_(cluster_diameter) {}

    std::vector<Root> solve(const Rectangle& box, long count, std::size_t depth) const {
        if (count <= 0) return {};
        if (count == 1) {
            if (auto r = newton_in(box)) return {*r};
            if (box.diameter() < 1e-12 * std::max(1.0, std::abs(box.center()))) return {cluster_root(box, 1)};
        } else if (box.diameter() < cluster_) {
            return {cluster_root(box, count)};
        }

        auto children = split(box, count);
        if (!children) return {cluster_root(box, count)};

        std::vector<Root> out;
        if (depth < parallel_depth()) {
            std::vector<std::future<std::vector<Root>>> jobs;
            for (const auto& [child, c] : *children)
                jobs.push_back(std::async(std::launch::async, [this, child, c, depth] { return solve(child, c, depth + 1); }));
            for (auto& j : jobs) {
                auto part = j.get();
                out.insert(out.end(), part.begin(), part.end());
            }
        } else {
            for (const auto& [child, c] : *children) {
                auto part = solve(child, c, depth + 1);
                out.insert(out.end(), part.begin(), part.end());
            }
        }
        return out;
    }

    [[nodiscard]] const LogDerivative& log_derivative() const noexcept { return ld_; }

private:
    [[nodiscard]] std::size_t parallel_depth() const noexcept {
        std::size_t d = 0;
        for (std::size_t cap = 1; cap * 4 <= opt_.threads; cap *= 4) ++d;
        return opt_.threads > 1 ? std::max<std::size_t>(d, 1) : 0;
    }

    // q has real coefficients: a root this close to the axis is real, since a
    // conjugate partner would be inseparable from it at this distance
    [[nodiscard]] static complex snap_real(complex z) {
        return std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z)) ? complex(z.real(), 0.0) : z;
    }

    [[nodiscard]] bool residual_ok(complex z) const {
        return std::abs(ld_.q().evaluate(z)) <= tol_ * ld_.q().magnitude_scale(z);
    }

    // Newton on q from the box center; the iterate must converge inside the box.
    [[nodiscard]] std::optional<Root> newton_in(const Rectangle& box) const {
        const auto& q = ld_.q();
        const auto& dq = ld_.dq();
        complex z = box.center();
        const double slack = 0.5 * box.diameter();
        for (std::size_t it = 0; it < opt_.newton_iterations; ++it) {
            const complex v = q.evaluate(z);
            const complex d = dq.evaluate(z);
            if (d == complex(0.0, 0.0)) return std::nullopt;
            const complex step = v / d;
            z -= step;
            if (!box.contains(z, slack)) return std::nullopt;
            const double zscale = std::max(1.0, std::abs(z));
            if (std::abs(step) <= 1e-14 * zscale || (residual_ok(z) && std::abs(step) <= 1e-9 * zscale)) {
                if (!box.contains(z)) return std::nullopt;
                z = snap_real(z);
                return Root{z, 1, std::abs(q.evaluate(z)), residual_ok(z)};
            }
        }
        return std::nullopt;
    }

    // A box holding `count` roots that cannot be separated further. Its
    // centroid comes from the first contour moment; Newton on q^(count-1)
    // then polishes a genuine multiple root to full precision.
    [[nodiscard]] Root cluster_root(const Rectangle& box, long count) const {
        complex z = box.center();
        complex centroid = z;
        try {
            const auto c = count_once(ld_, box, opt_.contour);
            if (c.count == count) centroid = c.moment / static_cast<double>(count);
        } catch (const NumericalError&) {
        }
        z = centroid;

        const auto m = static_cast<std::size_t>(count);
        const Quasipolynomial high = ld_.q().derivative(m - 1);
        const Quasipolynomial higher = high.derivative();
        complex w = z;
        bool polished = false;
        for (std::size_t it = 0; it < opt_.newton_iterations; ++it) {
            const complex d = higher.evaluate(w);
            if (d == complex(0.0, 0.0)) break;
            const complex step = high.evaluate(w) / d;
            w -= step;
            if (!box.contains(w, 0.5 * box.diameter())) break;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) {
                polished = true;
                break;
            }
        }
        if (polished && box.contains(w) &&
            std::abs(ld_.q().evaluate(w)) <= std::abs(ld_.q().evaluate(centroid)) * (1.0 + 1e-9))
            z = w;

        z = snap_real(z);
        const std::size_t mult = confirm_multiplicity(z, box, m);
        return Root{z, mult, std::abs(ld_.q().evaluate(z)), polished || residual_ok(z)};
    }

    // Recount on squares shrinking around z; keep the last count that did
    // not hit the numerical noise floor.
    [[nodiscard]] std::size_t confirm_multiplicity(complex z, const Rectangle& box, std::size_t m) const {
        std::size_t confirmed = m;
        double half = 0.5 * std::min(box.width(), box.height());
        for (int level = 0; level < 3; ++level, half *= 0.5) {
            try {
                const auto c = count_once(ld_, Rectangle::square(z, half), opt_.contour);
                if (c.count <= 0) break;
                confirmed = static_cast<std::size_t>(c.count);
                if (confirmed == m) break;
            } catch (const NumericalError&) {
                break;
            }
        }
        return confirmed;
    }

    using Children = std::vector<std::pair<Rectangle, long>>;

    // Quadrisect at off-centre fractions, skipping split lines that pass
    // through or too close to a root.
    [[nodiscard]] std::optional<Children> split(const Rectangle& box, long count) const {
        static constexpr double kFractions[] = {0.5123, 0.4671, 0.5389, 0.4457, 0.5731, 0.4219};
        for (double fx : kFractions) {
            const double xs = box.re_min + fx * box.width();
            const double ys = box.im_min + (1.0 - fx) * box.height();
            const Rectangle quads[4] = {{box.re_min, xs, box.im_min, ys},
                                        {xs, box.re_max, box.im_min, ys},
                                        {box.re_min, xs, ys, box.im_max},
                                        {xs, box.re_max, ys, box.im_max}};
            try {
                Children out;
                long sum = 0;
                for (const auto& r : quads) {
                    const long c = count_once(ld_, r, opt_.contour).count;
                    if (c < 0) throw NumericalError("negative count");
                    sum += c;
                    out.emplace_back(r, c);
                }
                if (sum == count) return out;
            } catch (const NumericalError&) {
            }
        }
        return std::nullopt;
    }

    LogDerivative ld_;
    double tol_;
    RootFinderOptions opt_;
    double cluster_;
};

}  // namespace detail

inline void sort_roots(std::vector<Root>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        const double tie = 1e-9 * std::max({1.0, std::abs(a.location.real()), std::abs(b.location.real())});
        if (std::abs(a.location.real() - b.location.real()) > tie) return a.location.real() > b.location.real();
        return a.location.imag() < b.location.imag();
    });
}

/// Every zero of q in rect, each with its multiplicity, sorted by descending
/// real part then ascending imaginary part. `tol` is the relative residual
/// |q| / (rounding scale) accepted for simple roots.
///
/// Throws NumericalError when the multiplicities do not add up to the
/// argument-principle count of rect.
inline std::vector<Root> find_roots(const Quasipolynomial& q, const Rectangle& rect, double tol = 1e-10,
                                    const RootFinderOptions& opt = {}) {
    if (!(tol > 0.0)) throw std::invalid_argument("find_roots: tol must be positive");
    const auto total = count_roots_detailed(q, rect, opt.contour);
    const double cluster = opt.cluster_diameter > 0.0 ? opt.cluster_diameter : 1e-3 * total.rect.diameter();
    const detail::RootFinder finder(q, tol, opt, cluster);
    auto roots = finder.solve(total.rect, total.count, 0);
    std::size_t found = 0;
    for (const auto& r : roots) found += r.multiplicity;
    if (static_cast<long>(found) != total.count)
        throw NumericalError("located multiplicities sum to " + std::to_string(found) + " but the contour counts " +
                             std::to_string(total.count));
    sort_roots(roots);
    return roots;
}

/// Largest real part of a root of q inside region.
inline double spectral_abscissa(const Quasipolynomial& q, const Rectangle& region, const RootFinderOptions& opt = {}) {
    const auto roots = find_roots(q, region, 1e-10, opt);
    if (roots.empty()) throw NumericalError("spectral_abscissa: no roots in region");
    return roots.front().location.real();
}

/// True when every non-real root whose conjugate lies in rect has a partner
/// of equal multiplicity within tol.
inline bool conjugate_symmetric(const std::vector<Root>& roots, const Rectangle& rect, double tol) {
    for (const auto& r : roots) {
        const complex c = std::conj(r.location);
        if (std::abs(r.location.imag()) <= tol || !rect.contains(c)) continue;
        const bool paired = std::any_of(roots.begin(), roots.end(), [&](const Root& o) {
            return o.multiplicity == r.multiplicity && std::abs(o.location - c) <= tol * std::max(1.0, std::abs(c));
        });
        if (!paired) return false;
    }
    return true;
}

}  // namespace midspec
