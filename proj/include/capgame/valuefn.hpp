#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "model.hpp"
#include "special.hpp"

namespace capgame {

enum class Membership { Free, Prolonged, Saturated, Install };
enum class Region4 { W1W2, W1I2, I1W2, I1I2 };

inline std::string to_string(Membership m) {
    switch (m) {
        case Membership::Free: return "free";
        case Membership::Prolonged: return "prol";
        case Membership::Saturated: return "sat";
        case Membership::Install: return "install";
    }
    return "?";
}

inline std::string to_string(Region4 r) {
    switch (r) {
        case Region4::W1W2: return "W1W2";
        case Region4::W1I2: return "W1I2";
        case Region4::I1W2: return "I1W2";
        case Region4::I1I2: return "I1I2";
    }
    return "?";
}

struct RegionLabel4 {
    Region4 label = Region4::W1W2;
    Membership player1 = Membership::Free;
    Membership player2 = Membership::Free;
};

/// Waiting-region membership of `who` at (x, y) for the reflected pair of boundaries.
inline Membership membership(const BoundaryCurve& F, double x, SimplexPoint y, Player who) {
    const double own = y.own(who), opp = y.opp(who), half = F.params().theta / 2;
    if (own <= opp) return x < F.trailing(own, opp) ? Membership::Free : Membership::Install;
    if (own >= half) return Membership::Saturated;
    return x < F.diag(own) ? Membership::Prolonged : Membership::Install;
}

inline RegionLabel4 classify(const BoundaryCurve& F, double x, SimplexPoint y) {
    RegionLabel4 r;
    r.player1 = membership(F, x, y, Player::One);
    r.player2 = membership(F, x, y, Player::Two);
    const bool i1 = r.player1 == Membership::Install, i2 = r.player2 == Membership::Install;
    r.label = i1 ? (i2 ? Region4::I1I2 : Region4::I1W2) : (i2 ? Region4::W1I2 : Region4::W1W2);
    return r;
}

/// Quantities of v1 = m1 psi(x + beta <1,y>) + R1 and its derivatives at one state.
struct LocalValue {
    double v = 0, dx = 0, dxx = 0, dy1 = 0, dy2 = 0;
};

/// Candidate value of the continuous game for player 1 (player 2 by reflection).
class ValueField {
public:
    ValueField(const PsiEvaluator& psi, BoundaryCurve F, MGrid m)
        : psi_(psi), F_(std::move(F)), m_(std::move(m)), p_(psi.params()) {}

    const ModelParams& params() const { return p_; }
    const BoundaryCurve& boundary() const { return F_; }
    const MGrid& mgrid() const { return m_; }
    const PsiEvaluator& psi() const { return psi_; }

    RegionLabel4 classify(double x, SimplexPoint y) const { return capgame::classify(F_, x, y); }

    /// v1 and its derivatives from the analytic decomposition (one-sided m1 gradients).
    LocalValue local(double x, SimplexPoint y) const {
        const double z = x + p_.beta * y.total();
        const PsiValues pv = psi_.eval(z);
        const double m = m_.value(y);
        const auto [g1, g2] = m_.gradient(y);
        const double den = p_.rho * (p_.rho + p_.k);
        LocalValue out;
        out.v = m * pv[0] + r_i(p_, x, y, Player::One);
        out.dx = m * pv[1] + y.y1 / (p_.rho + p_.k);
        out.dxx = m * pv[2];
        const double d1R = (x * p_.rho + p_.mu * p_.k - p_.beta * p_.k * y.total()) / den -
                           p_.beta * p_.k * y.y1 / den;
        const double d2R = -p_.beta * p_.k * y.y1 / den;
        out.dy1 = g1 * pv[0] + p_.beta * m * pv[1] + d1R;
        out.dy2 = g2 * pv[0] + p_.beta * m * pv[1] + d2R;
        return out;
    }

    /// Post-installation state reached at time 0 under the equilibrium strategy.
    SimplexPoint target(double x, SimplexPoint y) const {
        const RegionLabel4 r = classify(x, y);
        switch (r.label) {
            case Region4::W1W2: return y;
            case Region4::W1I2: return {y.y1, std::max(y.y2, F_.inverse(x, y.y1))};
            case Region4::I1W2: return {std::max(y.y1, F_.inverse(x, y.y2)), y.y2};
            case Region4::I1I2: {
                const double t = F_.inverse(x, y.y1);
                return {std::max(y.y1, t), std::max(y.y2, t)};
            }
        }
        return y;
    }

    /// V1 with derivatives: the four-case assembly evaluated at the post-installation state.
    LocalValue evaluate(double x, SimplexPoint y) const {
        const RegionLabel4 r = classify(x, y);
        const SimplexPoint t = target(x, y);
        LocalValue out = local(x, t);
        switch (r.label) {
            case Region4::W1W2: break;
            case Region4::W1I2: out.dy2 = 0; break;
            case Region4::I1W2:
                out.v -= p_.c * (t.y1 - y.y1);
                out.dy1 = p_.c;
                break;
            case Region4::I1I2:
                out.v -= p_.c * (t.y1 - y.y1);
                out.dy1 = p_.c;
                out.dy2 = 0;
                break;
        }
        return out;
    }

    double value(double x, SimplexPoint y, Player who = Player::One) const {
        return who == Player::One ? evaluate(x, y).v : evaluate(x, reflect(y)).v;
    }

    /// (sigma^2/2) V_xx + k(mu - beta<1,y> - x) V_x - rho V + x y1 in the joint waiting region.
    double residual_pde(double x, SimplexPoint y) const {
        const LocalValue l = local(x, y);
        return p_.sigma * p_.sigma / 2 * l.dxx + p_.k * (p_.mu - p_.beta * y.total() - x) * l.dx - p_.rho * l.v +
               x * y.y1;
    }

    /// (d/dy1 v1 - c on player 1's boundary, d/dy2 v1 on player 2's boundary).
    /// The first component needs y1 <= y2, the second y1 >= y2; the other is NaN.
    std::pair<double, double> residual_smooth_fit(SimplexPoint y) const {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        double r1 = nan, r2 = nan;
        if (y.y1 <= y.y2) {
            const SimplexPoint yy = y.y1 == y.y2 ? SimplexPoint{y.y1, std::nextafter(y.y2, 1e300)} : y;
            r1 = local(F_.upper(y), yy).dy1 - p_.c;
        }
        if (y.y1 >= y.y2) {
            const SimplexPoint yy = y.y1 == y.y2 ? SimplexPoint{std::nextafter(y.y1, 1e300), y.y2} : y;
            r2 = local(F_.lower(y), yy).dy2;
        }
        return {r1, r2};
    }

    /// (d/dy1 + d/dy2) m1(C) + 2 (Rt1(F_tilde(C), C) - c) / psi(F_tilde(C)), with the directional
    /// derivative taken from the upper-side d/dy1 and lower-side d/dy2 at C.
    double diagonal_condition_at_c() const {
        const int n = m_.n();
        const double z = F_.diag_ftilde(p_.theta / 2);
        const double sum = m_.up_d1(n, n) + m_.lo_d2(n, n);
        return sum + 2 * (r_tilde_1(p_, z, corner_C(p_)) - p_.c) / psi_.psi(z);
    }

private:
    PsiEvaluator psi_;
    BoundaryCurve F_;
    MGrid m_;
    ModelParams p_;
};

inline ValueField build_value_field(const PsiEvaluator& psi, const BoundaryOptions& opt = {}, int m_n = 0) {
    BoundaryCurve F = solve_boundary(psi, opt);
    MGrid m = solve_m(psi, F, m_n > 0 ? m_n : opt.n);
    return ValueField(psi, std::move(F), std::move(m));
}

/// Limit of d/dy1 V1 - c at the cap face: x/(rho+k) + k(mu - beta theta)/(rho(rho+k)) - c, taken at the
/// AB root for y = (theta/4, 3theta/4), or at F(C) + beta theta when `at_diagonal_endpoint` is set.
inline double remark_inconsistency_check(const PsiEvaluator& psi, bool at_diagonal_endpoint = false) {
    const ModelParams& p = psi.params();
    const SimplexPoint y{p.theta / 4, 3 * p.theta / 4};
    const double x = at_diagonal_endpoint ? diagonal_endpoint_f(p) + p.beta * y.total()
                                          : solve_side_ab(psi, y).ftilde;
    return x / (p.rho + p.k) + p.k * (p.mu - p.beta * p.theta) / (p.rho * (p.rho + p.k)) - p.c;
}

/// Probe set for diagnostics: x in [mu - 4s, mu + 4s] U [F(O) - 1, F(C) + 1], s = sigma/sqrt(2k),
/// y on a triangular grid with `ny` cells per side.
struct ProbeBox {
    std::vector<double> xs;
    std::vector<SimplexPoint> ys;
};

inline ProbeBox default_probe_box(const BoundaryCurve& F, int nx = 41, int ny = 60) {
    const ModelParams& p = F.params();
    const double s = p.sigma / std::sqrt(2 * p.k);
    ProbeBox box;
    const double a0 = p.mu - 4 * s, a1 = p.mu + 4 * s;
    const double b0 = F.diag(0) - 1, b1 = F.diag(p.theta / 2) + 1;
    for (int i = 0; i < nx; ++i) box.xs.push_back(a0 + (a1 - a0) * i / (nx - 1));
    for (int i = 0; i < nx; ++i) box.xs.push_back(b0 + (b1 - b0) * i / (nx - 1));
    std::sort(box.xs.begin(), box.xs.end());
    box.xs.erase(std::unique(box.xs.begin(), box.xs.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 box.xs.end());
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; i + j <= ny; ++j) box.ys.push_back({p.theta * i / ny, p.theta * j / ny});
    return box;
}

struct RegionStats {
    std::size_t count = 0;
    double max_abs_residual = 0;
    double sum_abs_residual = 0;
};

/// Residual and growth diagnostics of a value field over a probe box.
struct ValueDiagnostics {
    std::map<Region4, RegionStats> regions;  ///< PDE residual only for interior joint-waiting probes
    double max_pde_scaled = 0;      ///< max |residual| / (1 + |x|) over interior W1W2 probes
    double growth_K = 0;            ///< max |V1| / (1 + |x|)
    double lipschitz_L = 0;         ///< max slope of d/dx V1 between neighbouring x probes
    double min_m_upper_cap = 0;     ///< min m1 over grid nodes with y2 >= theta/2
    std::size_t below_r1 = 0;       ///< probes with y2 >= theta/2 and V1 < R1
    std::size_t ineq_violations = 0;  ///< W1W2 probes with d/dy1 V1 - c > tol
    double worst_ineq = -std::numeric_limits<double>::infinity();
    double worst_ineq_x = 0;
    SimplexPoint worst_ineq_y;
    double max_smooth_fit = 0;      ///< max smooth-fit residual over integration nodes
};

inline ValueDiagnostics diagnose(const ValueField& V, const ProbeBox& box, double ineq_tol = 1e-6) {
    const ModelParams& p = V.params();
    const MGrid& mg = V.mgrid();
    ValueDiagnostics d;
    const double margin = 2 * mg.h();
    for (const SimplexPoint& y : box.ys) {
        double prev_dx = 0, prev_x = 0;
        bool have_prev = false;
        for (double x : box.xs) {
            const RegionLabel4 r = V.classify(x, y);
            const LocalValue val = V.evaluate(x, y);
            RegionStats& st = d.regions[r.label];
            ++st.count;
            d.growth_K = std::max(d.growth_K, std::abs(val.v) / (1 + std::abs(x)));
            if (y.y2 >= p.theta / 2 && val.v < r_i(p, x, y, Player::One) - 1e-12) ++d.below_r1;
            if (have_prev && x > prev_x)
                d.lipschitz_L = std::max(d.lipschitz_L, std::abs(val.dx - prev_dx) / (x - prev_x));
            prev_dx = val.dx;
            prev_x = x;
            have_prev = true;
            if (r.label != Region4::W1W2) continue;
            // distance to both boundaries at least `margin` in every direction
            const bool interior = V.classify(x + margin, y).label == Region4::W1W2 &&
                                  V.classify(x, {y.y1 + margin, y.y2}).label == Region4::W1W2 &&
                                  V.classify(x, {y.y1, y.y2 + margin}).label == Region4::W1W2 &&
                                  y.total() + 2 * margin <= p.theta;
            if (interior) {
                const double res = std::abs(V.residual_pde(x, y));
                st.max_abs_residual = std::max(st.max_abs_residual, res);
                st.sum_abs_residual += res;
                d.max_pde_scaled = std::max(d.max_pde_scaled, res / (1 + std::abs(x)));
            }
            if (y.total() < p.theta - 1e-12) {
                const double ineq = val.dy1 - p.c;
                if (ineq > d.worst_ineq) {
                    d.worst_ineq = ineq;
                    d.worst_ineq_x = x;
                    d.worst_ineq_y = y;
                }
                if (ineq > ineq_tol) ++d.ineq_violations;
            }
        }
    }
    const int n = mg.n();
    d.min_m_upper_cap = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2 * n; ++i)
        for (int j = n; i + j <= 2 * n; ++j) d.min_m_upper_cap = std::min(d.min_m_upper_cap, mg.at(i, j));
    const double h = mg.h();
    for (int i = 0; i <= 2 * n; ++i)
        for (int j = 0; i + j <= 2 * n; ++j) {
            const auto [r1, r2] = V.residual_smooth_fit({i * h, j * h});
            if (std::isfinite(r1)) d.max_smooth_fit = std::max(d.max_smooth_fit, std::abs(r1));
            if (std::isfinite(r2)) d.max_smooth_fit = std::max(d.max_smooth_fit, std::abs(r2));
        }
    return d;
}

/// Largest jump of V1 across player 1's and player 2's boundaries over a grid of y,
/// evaluated with one-sided offsets of +-eps in x.
struct InterfaceJumps {
    double across_own = 0;    ///< across x = F1(y), y1 <= y2
    double across_other = 0;  ///< across x = F2(y), y1 >= y2
    double across_joint = 0;  ///< across x = F(y2, y2), y1 < y2 < theta/2
    double dxx_jump_own = 0;  ///< jump of d2/dx2 V1 across x = F1(y) (expected nonzero)
};

inline InterfaceJumps interface_jumps(const ValueField& V, int ny = 40, double eps = 1e-7) {
    const ModelParams& p = V.params();
    const BoundaryCurve& F = V.boundary();
    InterfaceJumps out;
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; i + j < ny; ++j) {
            const SimplexPoint y{p.theta * i / ny, p.theta * j / ny};
            auto jump = [&](double x0) {
                return std::abs(V.evaluate(x0 + eps, y).v - V.evaluate(x0 - eps, y).v);
            };
            if (y.y1 <= y.y2) {
                const double x0 = F.upper(y);
                out.across_own = std::max(out.across_own, jump(x0));
                out.dxx_jump_own = std::max(
                    out.dxx_jump_own, std::abs(V.evaluate(x0 + 1e-5, y).dxx - V.evaluate(x0 - 1e-5, y).dxx));
                if (y.y1 < y.y2 && y.y2 < p.theta / 2)
                    out.across_joint = std::max(out.across_joint, jump(F.diag(y.y2)));
            }
            if (y.y1 >= y.y2) out.across_other = std::max(out.across_other, jump(F.lower(y)));
        }
    return out;
}

}  // namespace capgame
