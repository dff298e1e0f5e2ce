#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for real- or
// complex-valued integrands on a finite interval.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace midspec::quadrature {

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (the 7-point rule).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

}  // namespace detail

template <class T>
struct Segment {
    double a = 0.0;
    double b = 0.0;
    T value{};
    double error = 0.0;
};

/// One 15-point Kronrod estimate of the integral over [a, b], with the
/// difference to the embedded 7-point Gauss rule as error estimate.
template <class T, class F>
Segment<T> kronrod15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kronrod = fc * detail::kKronrodWeights[7];
    T gauss = fc * detail::kGaussWeights[3];
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = h * detail::kKronrodNodes[i];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        kronrod += (f1 + f2) * detail::kKronrodWeights[i];
        if (i % 2 == 1) gauss += (f1 + f2) * detail::kGaussWeights[i / 2];
    }
    return {a, b, kronrod * h, detail::magnitude(T((kronrod - gauss) * h))};
}

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    std::size_t segments = 0;
    bool converged = false;
};

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;
    std::size_t initial_segments = 1;
    std::size_t max_segments = 4096;
};

/// Bisects the segment with the largest error estimate until the summed
/// estimate is below max(abs_tol, rel_tol * |value|).
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, const Options& opt = {}) {
    auto worse = [](const Segment<T>& x, const Segment<T>& y) { return x.error < y.error; };
    std::priority_queue<Segment<T>, std::vector<Segment<T>>, decltype(worse)> heap(worse);

    const std::size_t n0 = opt.initial_segments == 0 ? 1 : opt.initial_segments;
    T total{};
    double error = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(n0);
        const double hi = i + 1 == n0 ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n0);
        auto seg = kronrod15<T>(f, lo, hi);
        total += seg.value;
        error += seg.error;
        heap.push(seg);
    }

    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)); };
    while (error > tolerance() && heap.size() < opt.max_segments) {
        const Segment<T> worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        auto left = kronrod15<T>(f, worst.a, mid);
        auto right = kronrod15<T>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum to shed the drift of the running updates
    Result<T> out;
    out.segments = heap.size();
    out.error = 0.0;
    while (!heap.empty()) {
        out.value += heap.top().value;
        out.error += heap.top().error;
        heap.pop();
    }
    out.converged = out.error <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(out.value));
    return out;
}

}  // namespace midspec::quadrature
