#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace capgame {

/// Piecewise cubic Hermite interpolant on strictly increasing abscissae.
/// Slopes are either supplied (e.g. ODE right-hand sides) or estimated with the
/// Fritsch-Butland harmonic mean; the Fritsch-Carlson limiter is then applied so
/// that the interpolant is monotone wherever the data are.
class MonotoneHermite {
public:
    MonotoneHermite() = default;

    MonotoneHermite(std::vector<double> x, std::vector<double> y, std::vector<double> slopes = {})
        : x_(std::move(x)), y_(std::move(y)), d_(std::move(slopes)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n || (!d_.empty() && d_.size() != n))
            throw ParameterError("MonotoneHermite: need >= 2 nodes with matching sizes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw ParameterError("MonotoneHermite: abscissae must increase");
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        if (d_.empty()) {
            d_.assign(n, 0.0);
            d_[0] = delta[0];
            d_[n - 1] = delta[n - 2];
            for (std::size_t i = 1; i + 1 < n; ++i)
                if (delta[i - 1] * delta[i] > 0)
                    d_[i] = 2 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0) {
                d_[i] = d_[i + 1] = 0;
                continue;
            }
            double a = d_[i] / delta[i], b = d_[i + 1] / delta[i];
            if (a < 0) d_[i] = a = 0;
            if (b < 0) d_[i + 1] = b = 0;
            const double s = a * a + b * b;
            if (s > 9) {
                const double t = 3 / std::sqrt(s);
                d_[i] = t * a * delta[i];
                d_[i + 1] = t * b * delta[i];
            }
        }
        uniform_ = true;
        const double h = (x_.back() - x_.front()) / double(n - 1);
        for (std::size_t i = 0; i < n && uniform_; ++i)
            uniform_ = std::abs(x_[i] - (x_.front() + double(i) * h)) <= 1e-12 * (1 + std::abs(x_[i]));
    }

    double xmin() const { return x_.front(); }
    double xmax() const { return x_.back(); }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& slopes() const { return d_; }

    /// Value; arguments outside the table are clamped to its end points.
    double operator()(double t) const {
        const std::size_t i = segment(t);
        return eval(i, std::clamp(t, x_.front(), x_.back()));
    }

    double derivative(double t) const {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        const double u = (std::clamp(t, x_.front(), x_.back()) - x_[i]) / h;
        const double h00 = 6 * u * u - 6 * u, h10 = 3 * u * u - 4 * u + 1;
        const double h01 = -h00, h11 = 3 * u * u - 2 * u;
        return (h00 * y_[i] + h01 * y_[i + 1]) / h + h10 * d_[i] + h11 * d_[i + 1];
    }

    bool strictly_increasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] > y_[i - 1])) return false;
        return true;
    }

    /// Inverse of an increasing interpolant; values outside the range clamp to the end abscissae.
    double inverse(double v) const {
        if (v <= y_.front()) return x_.front();
        if (v >= y_.back()) return x_.back();
        const auto it = std::upper_bound(y_.begin(), y_.end(), v);
        const std::size_t i = std::size_t(it - y_.begin()) - 1;
        double lo = x_[i], hi = x_[i + 1];
        // secant start, then safeguarded Newton
        double t = lo + (v - y_[i]) / (y_[i + 1] - y_[i]) * (hi - lo);
        for (int iter = 0; iter < 60; ++iter) {
            const double f = eval(i, t) - v;
            if (f > 0) hi = t; else lo = t;
            if (std::abs(f) <= 1e-15 * (1 + std::abs(v)) || hi - lo <= 1e-15 * (1 + std::abs(t))) break;
            const double df = derivative(t);
            double next = df > 0 ? t - f / df : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            t = next;
        }
        return t;
    }

private:
    std::size_t segment(double t) const {
        const std::size_t n = x_.size();
        if (t <= x_.front()) return 0;
        if (t >= x_.back()) return n - 2;
        if (uniform_) {
            const double h = (x_.back() - x_.front()) / double(n - 1);
            return std::min(n - 2, std::size_t((t - x_.front()) / h));
        }
        return std::size_t(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    }

    double eval(std::size_t i, double t) const {
        const double h = x_[i + 1] - x_[i];
        const double u = (t - x_[i]) / h;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y_[i] + (u3 - 2 * u2 + u) * h * d_[i] + (-2 * u3 + 3 * u2) * y_[i + 1] +
               (u3 - u2) * h * d_[i + 1];
    }

    std::vector<double> x_, y_, d_;
    bool uniform_ = false;
};

}  // namespace capgame
