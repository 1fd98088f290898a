#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace capgame {

/// psi and its first three derivatives at one point. Values are stored as
/// scaled[n] * exp(log_scale) so that ratios stay finite far in the right tail.
struct PsiValues {
    std::array<double, 4> scaled{};
    double log_scale = 0.0;
    double rel_error = 0.0;  ///< estimated relative quadrature error (max over orders)

    double operator[](int n) const { return scaled[n] * std::exp(log_scale); }
    /// psi^{(n)} / psi^{(m)}
    double ratio(int n, int m) const { return scaled[n] / scaled[m]; }
};

namespace detail {

/// Abscissae of the exp-sinh rule, grouped by refinement level. Level 0 holds
/// tau = j*h0 (j >= 0), level l >= 1 the odd multiples of h0 / 2^l.
struct ExpSinhNodes {
    static constexpr double kH0 = 0.25;
    static constexpr double kTauMax = 8.0;
    static constexpr int kLevels = 9;

    struct Node {
        double sinh_half_pi;  ///< (pi/2) sinh(tau)
        double log_cosh;
    };
    std::array<std::vector<Node>, kLevels> level;

    ExpSinhNodes() {
        auto make = [](double tau) {
            return Node{std::numbers::pi / 2 * std::sinh(tau), std::log(std::cosh(tau))};
        };
        for (int j = 0; j * kH0 <= kTauMax; ++j) level[0].push_back(make(j * kH0));
        for (int l = 1; l < kLevels; ++l) {
            const double h = kH0 / double(1 << l);
            for (int j = 0; (2 * j + 1) * h <= kTauMax; ++j) level[l].push_back(make((2 * j + 1) * h));
        }
    }

    static const ExpSinhNodes& instance() {
        static const ExpSinhNodes nodes;
        return nodes;
    }
};

}  // namespace detail

/// Positive increasing fundamental solution of (sigma^2/2) f'' + k(mu - x) f' - rho f = 0:
///   psi(x) = 1/Gamma(rho/k) * int_0^inf t^{rho/k-1} exp(-t^2/2 + b t) dt,  b = (x-mu) sqrt(2k)/sigma.
/// Evaluated by a double-exponential (exp-sinh) rule in log t centred on the integrand's peak,
/// refined by step halving until every derivative order agrees to rel_tol.
class PsiEvaluator {
public:
    explicit PsiEvaluator(const ModelParams& params, double rel_tol = 1e-10)
        : p_(validate(params)), rel_tol_(rel_tol) {
        a_ = p_.rho / p_.k;
        dfac_ = std::sqrt(2 * p_.k) / p_.sigma;
        log_norm_ = -std::lgamma(a_);
        if (!(rel_tol > 0)) throw ParameterError("quadrature tolerance must be positive");
    }

    const ModelParams& params() const { return p_; }
    double rel_tol() const { return rel_tol_; }

    /// All four derivative orders in one pass.
    PsiValues eval(double x) const {
        if (!std::isfinite(x)) throw ParameterError("psi: x must be finite");
        const double b = (x - p_.mu) * dfac_;
        // peak of t^a exp(-t^2/2 + b t) and its width in log t
        const double disc = std::sqrt(b * b + 4 * a_);
        const double ts = b >= 0 ? (b + disc) / 2 : 2 * a_ / (disc - b);
        const double width = 1.0 / std::sqrt(ts * disc);
        const double sw = std::min(1.0, width / 0.7);
        const double lts = std::log(ts);
        const double peak = a_ * lts - ts * ts / 2 + b * ts;

        const auto& nodes = detail::ExpSinhNodes::instance();
        std::array<double, 4> sum{};
        std::array<double, 4> prev{};
        auto accumulate_side = [&](const std::vector<detail::ExpSinhNodes::Node>& lv, double sign,
                                   std::size_t start, std::array<double, 4>& acc) {
            for (std::size_t j = start; j < lv.size(); ++j) {
                const double v = lts + sign * sw * lv[j].sinh_half_pi;
                const double t = std::exp(v);
                const double L = a_ * v - t * t / 2 + b * t + lv[j].log_cosh - peak;
                if (L < -46.0) return;  // integrand decreases monotonically away from the peak
                const double e = std::exp(L);
                acc[0] += e;
                acc[1] += e * t;
                acc[2] += e * t * t;
                acc[3] += e * t * t * t;
                if (j + 1 == lv.size())
                    throw NumericalError("psi: integrand not negligible at end of quadrature range (x = " +
                                         std::to_string(x) + ")");
            }
        };

        double h = detail::ExpSinhNodes::kH0;
        {
            std::array<double, 4> acc{};
            accumulate_side(nodes.level[0], 1.0, 0, acc);
            accumulate_side(nodes.level[0], -1.0, 1, acc);
            for (int n = 0; n < 4; ++n) sum[n] = h * acc[n];
        }
        double err = 0.0;
        for (int l = 1; l < detail::ExpSinhNodes::kLevels; ++l) {
            h /= 2;
            std::array<double, 4> acc{};
            accumulate_side(nodes.level[l], 1.0, 0, acc);
            accumulate_side(nodes.level[l], -1.0, 0, acc);
            prev = sum;
            for (int n = 0; n < 4; ++n) sum[n] = prev[n] / 2 + h * acc[n];
            err = 0.0;
            for (int n = 0; n < 4; ++n) err = std::max(err, std::abs(sum[n] - prev[n]) / std::abs(sum[n]));
            if (l >= 2 && err <= rel_tol_) {
                PsiValues out;
                double f = 1.0;
                for (int n = 0; n < 4; ++n, f *= dfac_) out.scaled[n] = f * sum[n];
                out.log_scale = peak + std::log(sw * std::numbers::pi / 2) + log_norm_;
                out.rel_error = err;
                return out;
            }
        }
        throw NumericalError("psi: quadrature did not converge at x = " + std::to_string(x) +
                             " (relative change " + std::to_string(err) + ")");
    }

    double psi(double x, int order = 0) const {
        if (order < 0 || order > 3) throw ParameterError("psi: order must be in 0..3");
        return finite(eval(x)[order], x);
    }

    /// psi psi'' - psi'^2
    double q0(double x) const { return positive(q0(eval(x)), "q0", x); }
    /// psi' psi''' - psi''^2
    double q1(double x) const { return positive(q1(eval(x)), "q1", x); }

    static double q0(const PsiValues& v) {
        const double s = std::exp(2 * v.log_scale);
        return (v.scaled[0] * v.scaled[2] - v.scaled[1] * v.scaled[1]) * s;
    }
    static double q1(const PsiValues& v) {
        const double s = std::exp(2 * v.log_scale);
        return (v.scaled[1] * v.scaled[3] - v.scaled[2] * v.scaled[2]) * s;
    }

    /// (sigma^2/2) psi'' + k (mu - x) psi' - rho psi
    double ode_residual(double x) const {
        const PsiValues v = eval(x);
        return p_.sigma * p_.sigma / 2 * v[2] + p_.k * (p_.mu - x) * v[1] - p_.rho * v[0];
    }

private:
    static double finite(double v, double x) {
        if (!std::isfinite(v)) throw NumericalError("psi: value overflows at x = " + std::to_string(x));
        return v;
    }
    static double positive(double v, const char* what, double x) {
        if (!(v > 0))
            throw NumericalError(std::string(what) + " not positive at x = " + std::to_string(x) +
                                 " (quadrature failure)");
        return v;
    }

    ModelParams p_;
    double rel_tol_;
    double a_ = 1.0;
    double dfac_ = 1.0;
    double log_norm_ = 0.0;
};

}  // namespace capgame
