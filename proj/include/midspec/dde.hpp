#pragma once

// Method-of-steps integration of
//   y^{(n)}(t) + sum_k a_k y^{(k)}(t) + sum_k alpha_k y^{(k)}(t - tau) = 0
// in the first-order form x' = A0 x + A1 x(t - tau), x = (y, y', ..., y^{(n-1)}).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "midspec/retarded_system.hpp"

namespace midspec {

/// Initial function on [-tau, 0] with analytic derivatives.
class HistoryFunction {
public:
    enum class Kind { Constant, Linear, Quadratic, Sinusoid, Sampled };

    static HistoryFunction constant(double c) { return HistoryFunction(Kind::Constant, {c}); }
    /// c0 + c1 t
    static HistoryFunction linear(double c0, double c1) { return HistoryFunction(Kind::Linear, {c0, c1}); }
    /// c0 + c1 t + c2 t^2
    static HistoryFunction quadratic(double c0, double c1, double c2) {
        return HistoryFunction(Kind::Quadratic, {c0, c1, c2});
    }
    /// amplitude * sin(omega t + phase)
    static HistoryFunction sinusoid(double amplitude, double omega, double phase = 0.0) {
        return HistoryFunction(Kind::Sinusoid, {amplitude, omega, phase});
    }
    /// Natural cubic spline through (times[i], values[i]).
    static HistoryFunction sampled(std::vector<double> times, std::vector<double> values) {
        if (times.size() != values.size() || times.size() < 2)
            throw std::invalid_argument("sampled history needs at least two (t, y) pairs");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("sampled history times must increase strictly");
        HistoryFunction h(Kind::Sampled, {});
        h.knots_ = std::move(times);
        h.values_ = std::move(values);
        h.build_spline();
        return h;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<double>& parameters() const noexcept { return p_; }

    /// The same function multiplied by c.
    [[nodiscard]] HistoryFunction scaled(double c) const {
        HistoryFunction h = *this;
        h.scale_ *= c;
        return h;
    }

    /// True when the function is defined on all of [-tau, 0].
    [[nodiscard]] bool covers(double tau) const {
        if (kind_ != Kind::Sampled) return true;
        const double slack = 1e-12 * std::max(1.0, tau);
        return knots_.front() <= -tau + slack && knots_.back() >= -slack;
    }

    /// k-th derivative at t.
    [[nodiscard]] double derivative(double t, std::size_t k) const { return scale_ * raw(t, k); }
    [[nodiscard]] double operator()(double t) const { return derivative(t, 0); }

private:
    HistoryFunction(Kind kind, std::vector<double> p) : kind_(kind), p_(std::move(p)) {}

    [[nodiscard]] double raw(double t, std::size_t k) const {
        switch (kind_) {
            case Kind::Constant: return k == 0 ? p_[0] : 0.0;
            case Kind::Linear: return k == 0 ? p_[0] + p_[1] * t : (k == 1 ? p_[1] : 0.0);
            case Kind::Quadratic:
                if (k == 0) return p_[0] + t * (p_[1] + t * p_[2]);
                if (k == 1) return p_[1] + 2.0 * p_[2] * t;
                return k == 2 ? 2.0 * p_[2] : 0.0;
            case Kind::Sinusoid: {
                // d^k/dt^k sin(u) = omega^k sin(u + k pi / 2)
                const double w = p_[1];
                return p_[0] * std::pow(w, static_cast<double>(k)) *
                       std::sin(w * t + p_[2] + static_cast<double>(k) * std::numbers::pi / 2.0);
            }
            case Kind::Sampled: return spline(t, k);
        }
        return 0.0;
    }

    void build_spline() {
        // second derivatives m_i with m_0 = m_{N-1} = 0, tridiagonal solve
        const std::size_t n = knots_.size();
        second_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = knots_[i] - knots_[i - 1], h1 = knots_[i + 1] - knots_[i];
            const double rhs = 6.0 * ((values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0);
            const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            second_[i] = d[i] - c[i] * second_[i + 1];
            if (i == 1) break;
        }
    }

    [[nodiscard]] double spline(double t, std::size_t k) const {
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        i = std::min(i, knots_.size() - 2);
        const double h = knots_[i + 1] - knots_[i];
        const double a = (knots_[i + 1] - t) / h, b = (t - knots_[i]) / h;
        const double m0 = second_[i], m1 = second_[i + 1], y0 = values_[i], y1 = values_[i + 1];
        switch (k) {
            case 0: return a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
            case 1: return (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
            case 2: return a * m0 + b * m1;
            case 3: return (m1 - m0) / h;
            default: return 0.0;
        }
    }

    Kind kind_;
    std::vector<double> p_;
    double scale_ = 1.0;
    std::vector<double> knots_, values_, second_;
};

/// The four initial functions 1, -t, -t^2/4 and -sin(2 pi t) / (6 (2 pi)^2).
inline HistoryFunction builtin_history(std::string_view name) {
    constexpr double w = 2.0 * std::numbers::pi;
    if (name == "y01") return HistoryFunction::constant(1.0);
    if (name == "y02") return HistoryFunction::linear(0.0, -1.0);
    if (name == "y03") return HistoryFunction::quadratic(0.0, 0.0, -0.25);
    if (name == "y04") return HistoryFunction::sinusoid(-1.0 / (6.0 * w * w), w);
    throw std::invalid_argument("unknown built-in history '" + std::string(name) + "'");
}

inline const std::vector<std::string>& builtin_history_names() {
    static const std::vector<std::string> names{"y01", "y02", "y03", "y04"};
    return names;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    double step = 0.0;
    double tau = 0.0;

    [[nodiscard]] std::size_t order() const noexcept { return states.empty() ? 0 : static_cast<std::size_t>(states[0].size()); }
};

/// Largest step not above `requested` that divides tau into an integer number of pieces.
inline double aligned_step(double tau, double requested) {
    if (!(tau > 0.0)) throw std::invalid_argument("aligned_step: tau must be positive");
    if (!(requested > 0.0)) throw std::invalid_argument("aligned_step: step must be positive");
    const double m = std::ceil(tau / requested - 1e-12);
    const double h = tau / m;
    if (std::abs(m * h - tau) > 1e-9) throw std::invalid_argument("aligned_step: step does not divide tau");
    return h;
}

/// RK4 by the method of steps. step <= 0 selects tau / 500.
inline Trajectory simulate(const RetardedSystem& sys, const HistoryFunction& history, double t_end, double step = 0.0) {
    sys.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
    if (!history.covers(sys.tau)) throw std::invalid_argument("simulate: history does not cover [-tau, 0]");
    const double tau = sys.tau;
    const double h = aligned_step(tau, step > 0.0 ? step : tau / 500.0);
    const auto per_delay = static_cast<std::size_t>(std::llround(tau / h));
    const auto n = static_cast<Eigen::Index>(sys.n);

    Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(n, n), A1 = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) A0(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        A0(n - 1, j) = -sys.a[static_cast<std::size_t>(j)];
        A1(n - 1, j) = -sys.alpha[static_cast<std::size_t>(j)];
    }

    auto history_state = [&](double t) {
        Eigen::VectorXd x(n);
        for (Eigen::Index k = 0; k < n; ++k) x(k) = history.derivative(t, static_cast<std::size_t>(k));
        return x;
    };

    const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    Trajectory traj;
    traj.step = h;
    traj.tau = tau;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    std::vector<Eigen::VectorXd> slopes;  // right derivative at each stored point
    slopes.reserve(steps + 1);

    // x'(t) is continuous for t > 0, so stored slopes serve both ends of an
    // interpolation interval; the jump at t = 0 only affects the right slope
    // at index 0, which is the one stored.
    auto delayed_end = [&](std::size_t j) -> Eigen::VectorXd {
        if (j < per_delay) return history_state(static_cast<double>(j) * h - tau);
        return traj.states[j - per_delay];
    };
    auto delayed_mid = [&](std::size_t j) -> Eigen::VectorXd {
        if (j < per_delay) return history_state((static_cast<double>(j) + 0.5) * h - tau);
        const std::size_t i = j - per_delay;
        return 0.5 * (traj.states[i] + traj.states[i + 1]) + 0.125 * h * (slopes[i] - slopes[i + 1]);
    };

    traj.times.push_back(0.0);
    traj.states.push_back(history_state(0.0));
    for (std::size_t j = 0; j < steps; ++j) {
        const Eigen::VectorXd x = traj.states[j];
        const Eigen::VectorXd k1 = A0 * x + A1 * delayed_end(j);
        slopes.push_back(k1);
        const Eigen::VectorXd zm = delayed_mid(j);
        const Eigen::VectorXd k2 = A0 * (x + 0.5 * h * k1) + A1 * zm;
        const Eigen::VectorXd k3 = A0 * (x + 0.5 * h * k2) + A1 * zm;
        const Eigen::VectorXd k4 = A0 * (x + h * k3) + A1 * delayed_end(j + 1);
        Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!next.allFinite())
            throw std::runtime_error("simulate: state became non-finite at t = " +
                                     std::to_string(static_cast<double>(j + 1) * h));
        traj.times.push_back(static_cast<double>(j + 1) * h);
        traj.states.push_back(std::move(next));
    }
    return traj;
}

namespace detail {

struct EnvelopeSamples {
    std::vector<double> t;
    std::vector<double> log_y;
};

// (time of max |y|, log max |y|) per delay interval starting at t_start.
inline EnvelopeSamples envelope_samples(const Trajectory& traj, double t_start) {
    if (traj.times.empty()) throw std::invalid_argument("decay_rate: empty trajectory");
    if (!(traj.tau > 0.0)) throw std::invalid_argument("decay_rate: trajectory has no delay length");
    EnvelopeSamples out;
    const double t_end = traj.times.back();
    const double slack = 1e-9 * std::max(1.0, traj.tau);
    auto idx = static_cast<std::size_t>(std::lower_bound(traj.times.begin(), traj.times.end(), t_start - slack) -
                                        traj.times.begin());
    for (double lo = t_start; lo < t_end - slack; lo += traj.tau) {
        const double hi = lo + traj.tau;
        double best = 0.0, at = lo;
        for (; idx < traj.times.size() && traj.times[idx] < hi - slack; ++idx) {
            const double v = std::abs(traj.states[idx](0));
            if (v > best) {
                best = v;
                at = traj.times[idx];
            }
        }
        if (best > 0.0 && std::isfinite(best)) {
            out.t.push_back(at);
            out.log_y.push_back(std::log(best));
        }
    }
    if (out.t.size() < 2) throw std::invalid_argument("decay_rate: trajectory is zero beyond t_start");
    return out;
}

}  // namespace detail

/// Least-squares slope of log(max |y|) per delay interval over [t_start, t_end].
inline double decay_rate(const Trajectory& traj, double t_start) {
    const auto e = detail::envelope_samples(traj, t_start);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(e.t.size()), 2);
    Eigen::VectorXd Y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        X.row(i) << 1.0, e.t[static_cast<std::size_t>(i)];
        Y(i) = e.log_y[static_cast<std::size_t>(i)];
    }
    return X.colPivHouseholderQr().solve(Y)(1);
}

/// Exponent r in the fit log(max |y|) = c + m log t + r t, which separates a
/// polynomial factor t^m from the exponential rate. Requires t_start > 0.
inline double polynomial_corrected_rate(const Trajectory& traj, double t_start) {
    if (!(t_start > 0.0)) throw std::invalid_argument("polynomial_corrected_rate: t_start must be positive");
    const auto e = detail::envelope_samples(traj, t_start);
    if (e.t.size() < 3) throw std::invalid_argument("polynomial_corrected_rate: needs at least three delay intervals");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(e.t.size()), 3);
    Eigen::VectorXd Y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double t = e.t[static_cast<std::size_t>(i)];
        X.row(i) << 1.0, std::log(t), t;
        Y(i) = e.log_y[static_cast<std::size_t>(i)];
    }
    return X.colPivHouseholderQr().solve(Y)(2);
}

}  // namespace midspec
