#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "errors.hpp"
#include "interpolation.hpp"
#include "model.hpp"
#include "special.hpp"

namespace capgame {

/// Right-hand side used for the symmetric boundary along the diagonal.
enum class DiagonalRule {
    /// Obtained by differentiating the closed-form diagonal option value along the
    /// diagonal and matching it with the diagonal transport equation for m1.
    Rederived,
    /// beta * N / D with N = (2rho+3k)/rho psi' + (rho+k)(c - Rt1) psi'' + psi' taken literally;
    /// not invariant under rescaling of psi and produces a decreasing boundary.
    AsDisplayed,
};

/// How the trailing player's boundary is continued off the diagonal.
enum class Extension {
    /// F(own, opp) = F_diag((own + w*opp)/(1+w)): level sets are straight lines
    /// (w = 1/2 reproduces the shape of the one-shot boundary).
    LevelSets,
    /// Smoothstep blend along each segment own = s between F_diag(s) at the diagonal
    /// and the root of the AB condition at (s, theta - s).
    AnchorBlend,
    /// Level sets below opp = theta/2; above it, blend from the level-set value at
    /// opp = theta/2 to the AB root at (own, theta - own) with weight increasing in
    /// both levels. Monotone in both variables; jumps only at C when the AB root there
    /// differs from F(C).
    CapBlend,
};

inline std::string to_string(DiagonalRule r) { return r == DiagonalRule::Rederived ? "rederived" : "as-displayed"; }
inline std::string to_string(Extension e) {
    switch (e) {
        case Extension::LevelSets: return "level-sets";
        case Extension::AnchorBlend: return "anchor-blend";
        case Extension::CapBlend: return "cap-blend";
    }
    return "?";
}

/// F_tilde at C = (theta/2, theta/2): (c rho (rho+k) + beta (rho+k) theta - mu k) / rho.
inline double diagonal_endpoint_ftilde(const ModelParams& p) {
    return (p.c * p.rho * (p.rho + p.k) + p.beta * (p.rho + p.k) * p.theta - p.mu * p.k) / p.rho;
}

/// F at C: (c rho (rho+k) + beta k theta - mu k) / rho.
inline double diagonal_endpoint_f(const ModelParams& p) {
    return (p.c * p.rho * (p.rho + p.k) + p.beta * p.k * p.theta - p.mu * p.k) / p.rho;
}

/// Boundary tabulated on the diagonal: s_i = i * (theta/2) / n.
struct DiagonalTable {
    std::vector<double> s;
    std::vector<double> f;       ///< F(s,s)
    std::vector<double> ftilde;  ///< F(s,s) + 2 beta s
    std::vector<double> dftilde; ///< d/ds F_tilde(s,s)
    DiagonalRule rule = DiagonalRule::Rederived;
};

namespace detail {

struct DiagonalSlope {
    double value;
    double denom;  ///< sign-carrying denominator (scaled by a positive factor)
};

/// d/ds of F_tilde(s,s) at shifted price z.
inline DiagonalSlope diagonal_slope(const PsiEvaluator& psi, DiagonalRule rule, double s, double z) {
    const ModelParams& p = psi.params();
    const PsiValues v = psi.eval(z);
    const double p0 = v.scaled[0], p1 = v.scaled[1], p2 = v.scaled[2], p3 = v.scaled[3];
    const double g = (p.c - r_tilde_1(p, z, {s, s})) * (p.rho + p.k);
    const double q0 = p0 * p2 - p1 * p1;
    const double q1 = p1 * p3 - p2 * p2;
    const double dq0 = p0 * p3 - p1 * p2;
    const double denom = p0 * (dq0 + g * q1);
    if (rule == DiagonalRule::Rederived) {
        const double num = p0 + p1 * g;
        const double bracket = (2 * p1 * num + q0 * (p.beta * p.k * s / p.rho + g)) / p0 +
                               (2 * p.rho + 3 * p.k) * p1 / p.rho;
        return {p.beta * q0 * bracket / denom, denom};
    }
    const double n = (2 * p.rho + 3 * p.k) / p.rho * p1 + g * p2 + p1;
    return {p.beta * n / denom * std::exp(-2 * v.log_scale), denom};
}

}  // namespace detail

/// Integrates the diagonal boundary equation with classical RK4 from C down to O.
/// Steps are halved (down to h/64) if the denominator changes sign inside a step.
inline DiagonalTable solve_diagonal(const PsiEvaluator& psi, int n, DiagonalRule rule = DiagonalRule::Rederived) {
    if (n < 2) throw ParameterError("solve_diagonal: n must be >= 2");
    const ModelParams& p = psi.params();
    const double h = p.theta / 2 / n;
    const double z_end = diagonal_endpoint_ftilde(p);
    const double ref_sign = std::copysign(1.0, detail::diagonal_slope(psi, rule, p.theta / 2, z_end).denom);

    auto rhs = [&](double s, double z, bool& ok) {
        const auto d = detail::diagonal_slope(psi, rule, s, z);
        if (!std::isfinite(d.value) || d.denom * ref_sign <= 0) ok = false;
        return d.value;
    };
    // one RK4 step of length hs going downward in s; returns false on singular stages
    auto rk4 = [&](double s, double z, double hs, double& out) {
        bool ok = true;
        const double k1 = rhs(s, z, ok);
        const double k2 = rhs(s - hs / 2, z - hs / 2 * k1, ok);
        const double k3 = rhs(s - hs / 2, z - hs / 2 * k2, ok);
        const double k4 = rhs(s - hs, z - hs * k3, ok);
        out = z - hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        return ok && std::isfinite(out);
    };
    auto advance = [&](auto&& self, double s, double z, double hs) -> double {
        double out = 0.0;
        if (rk4(s, z, hs, out)) return out;
        if (hs / 2 < h / 64) {
            std::ostringstream msg;
            msg << "solve_diagonal: denominator vanishes near s = " << s << " (F_tilde = " << z << ")";
            throw NumericalError(msg.str());
        }
        const double mid = self(self, s, z, hs / 2);
        return self(self, s - hs / 2, mid, hs / 2);
    };

    DiagonalTable t;
    t.rule = rule;
    t.s.resize(n + 1);
    t.ftilde.resize(n + 1);
    t.ftilde[n] = z_end;
    for (int i = 0; i <= n; ++i) t.s[i] = i * h;
    t.s[n] = p.theta / 2;
    for (int i = n; i > 0; --i) t.ftilde[i - 1] = advance(advance, t.s[i], t.ftilde[i], h);
    t.f.resize(n + 1);
    t.dftilde.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        bool ok = true;
        t.dftilde[i] = rhs(t.s[i], t.ftilde[i], ok);
        t.f[i] = t.ftilde[i] - 2 * p.beta * t.s[i];
    }
    t.f[n] = diagonal_endpoint_f(p);
    for (int i = 0; i < n; ++i)
        if (!(t.f[i + 1] > t.f[i])) {
            std::ostringstream msg;
            msg << "solve_diagonal: boundary not increasing along the diagonal near s = " << t.s[i] << " (F = "
                << t.f[i] << " -> " << t.f[i + 1] << ")";
            throw NumericalError(msg.str());
        }
    return t;
}

struct SideRoot {
    double ftilde;  ///< root in the shifted price
    double f;       ///< ftilde - beta (y1 + y2)
    double u_rel;   ///< |U(root)| / psi(root)
};

/// U(z) = psi(z) + psi'(z) (c - Rt1(z, y)) (rho + k), scaled by 1/psi's magnitude.
inline double side_condition_scaled(const PsiEvaluator& psi, SimplexPoint y, double z) {
    const ModelParams& p = psi.params();
    const PsiValues v = psi.eval(z);
    return 1.0 + v.ratio(1, 0) * (p.c - r_tilde_1(p, z, y)) * (p.rho + p.k);
}

/// Price at which player 1's option value vanishes on the capacity cap y1 + y2 = theta.
inline SideRoot solve_side_ab(const PsiEvaluator& psi, SimplexPoint y) {
    const ModelParams& p = psi.params();
    const double scale = p.sigma / std::sqrt(2 * p.k);
    const double lo = p.mu - 10 * scale, hi = p.mu + 10 * scale;
    auto u = [&](double z) { return side_condition_scaled(psi, y, z); };
    const double ulo = u(lo), uhi = u(hi);
    if (ulo * uhi > 0) {
        std::ostringstream msg;
        msg << "solve_side_ab: no sign change of U on [" << lo << ", " << hi << "] at y = (" << y.y1 << ", "
            << y.y2 << ")";
        throw NumericalError(msg.str());
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(u, lo, hi, ulo, uhi,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
    const double z = 0.5 * (r.first + r.second);
    return {z, z - p.beta * y.total(), std::abs(u(z))};
}

struct SideAnchor {
    double s;  ///< player 1 level; the anchor sits at (s, theta - s)
    double ftilde;
    double f;
};

/// Free boundary of the trailing player, stored once and used for both players by reflection.
/// trailing(own, opp) with own <= opp is player 1's boundary F1(own, opp) and player 2's F2(opp, own).
class BoundaryCurve {
public:
    BoundaryCurve(const ModelParams& p, DiagonalTable diag, Extension ext = Extension::LevelSets,
                  double level_weight = 0.5, std::vector<SideAnchor> anchors = {})
        : p_(validate(p)), table_(std::move(diag)), ext_(ext), w_(level_weight), anchors_(std::move(anchors)) {
        if (!(w_ > 0 && w_ <= 1)) throw ParameterError("level weight must lie in (0, 1]");
        diag_ = MonotoneHermite(table_.s, table_.f, diag_slopes());
        if (ext_ != Extension::LevelSets) {
            if (anchors_.size() < 2) throw ParameterError("anchor blends need at least two side anchors");
            std::vector<double> s, f;
            for (const auto& a : anchors_) {
                s.push_back(a.s);
                f.push_back(a.f);
            }
            side_ = MonotoneHermite(s, f);
        }
    }

    const ModelParams& params() const { return p_; }
    const DiagonalTable& table() const { return table_; }
    const std::vector<SideAnchor>& anchors() const { return anchors_; }
    Extension extension() const { return ext_; }
    double level_weight() const { return w_; }

    /// F(s, s)
    double diag(double s) const { return diag_(s); }
    double diag_slope(double s) const { return diag_.derivative(s); }
    double diag_ftilde(double s) const { return diag_(s) + 2 * p_.beta * s; }
    /// s with F(s,s) = x, clamped to [0, theta/2]
    double diag_inverse(double x) const { return diag_.inverse(x); }

    /// Boundary of a player holding `own` facing `opp` >= own.
    double trailing(double own, double opp) const {
        own = std::max(own, 0.0);
        opp = std::max(opp, own);
        if (ext_ == Extension::LevelSets) return diag_(level_point(own, opp));
        if (ext_ == Extension::CapBlend) {
            const double base = diag_(level_point(own, opp));
            const double half = p_.theta / 2;
            if (opp <= half || own >= half - 1e-14) return base;
            const double lam = std::min(1.0, (opp - half) / (half - own));
            return base + lam * lam * (2 - lam) * (side_(own) - base);
        }
        const double span = p_.theta - 2 * own;
        if (span <= 1e-14) return diag_(own);
        const double lam = std::clamp((opp - own) / span, 0.0, 1.0);
        const double blend = lam * lam * (3 - 2 * lam);
        const double fd = diag_(own);
        return fd + (side_(own) - fd) * blend;
    }

    /// F1 on {y1 <= y2}
    double upper(SimplexPoint y) const { return trailing(y.y1, y.y2); }
    /// F2 on {y1 >= y2}
    double lower(SimplexPoint y) const { return trailing(y.y2, y.y1); }
    /// boundary of `who` in its own half (own <= opp)
    double of(Player who, SimplexPoint y) const { return trailing(y.own(who), y.opp(who)); }

    /// Largest level a player may reach facing opponent level r.
    double cap(double r) const { return std::min(p_.theta / 2, p_.theta - r); }

    /// Level own in [0, cap(r) ∧ r] with trailing(own, r) = x (sectional inverse).
    double section_inverse(double r, double x) const {
        const double top = std::min(r, p_.theta - r);
        if (top <= 0) return 0.0;
        const double flo = trailing(0.0, r), fhi = trailing(top, r);
        if (x <= flo) return 0.0;
        if (x >= fhi) return top;
        if (ext_ == Extension::LevelSets || (ext_ == Extension::CapBlend && r <= p_.theta / 2)) {
            const double own = ((1 + w_) * diag_.inverse(x) - w_ * r);
            return std::clamp(own, 0.0, top);
        }
        auto f = [&](double o) { return trailing(o, r) - x; };
        std::uintmax_t iters = 200;
        const auto res = boost::math::tools::toms748_solve(f, 0.0, top, flo - x, fhi - x,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (res.first + res.second);
    }

    /// Target level of a player facing opponent level r when the price is x.
    double inverse(double x, double r) const {
        const double half = p_.theta / 2;
        if (x < trailing(0.0, r)) return 0.0;
        if (r >= half) return section_inverse(r, x);
        if (x < diag(r)) return section_inverse(r, x);
        if (x < diag(half)) return std::clamp(diag_inverse(x), r, half);
        return half;
    }

    /// Smallest price at which a player at `level` facing r starts installing (+inf if capped).
    double trigger(double r, double level) const {
        if (level >= cap(r) - kGeomEps) return std::numeric_limits<double>::infinity();
        if (level < r) return trailing(level, r);
        return diag(level);
    }

    /// Value of F at C approached along the capacity cap (equals diag(theta/2) unless anchors disagree).
    double cap_limit_at_c() const {
        const double s = p_.theta / 2;
        return ext_ == Extension::LevelSets ? diag_(s) : side_(s);
    }

private:
    double level_point(double own, double opp) const { return (own + w_ * opp) / (1 + w_); }

    std::vector<double> diag_slopes() const {
        std::vector<double> d(table_.s.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = table_.dftilde[i] - 2 * p_.beta;
        return d;
    }

    ModelParams p_;
    DiagonalTable table_;
    Extension ext_;
    double w_;
    std::vector<SideAnchor> anchors_;
    MonotoneHermite diag_;
    MonotoneHermite side_;
};

struct BoundaryOptions {
    int n = 400;
    DiagonalRule rule = DiagonalRule::Rederived;
    Extension extension = Extension::LevelSets;
    double level_weight = 0.5;
    int side_anchors = 41;  ///< number of AB anchors on s in [0, theta/2]
};

inline std::vector<SideAnchor> solve_side_anchors(const PsiEvaluator& psi, int count) {
    if (count < 2) throw ParameterError("need at least two side anchors");
    const ModelParams& p = psi.params();
    std::vector<SideAnchor> out;
    for (int i = 0; i < count; ++i) {
        const double s = p.theta / 2 * i / (count - 1);
        const SideRoot r = solve_side_ab(psi, {s, p.theta - s});
        out.push_back({s, r.ftilde, r.f});
    }
    return out;
}

inline BoundaryCurve solve_boundary(const PsiEvaluator& psi, const BoundaryOptions& opt = {}) {
    DiagonalTable diag = solve_diagonal(psi, opt.n, opt.rule);
    std::vector<SideAnchor> anchors = solve_side_anchors(psi, opt.side_anchors);
    return BoundaryCurve(psi.params(), std::move(diag), opt.extension, opt.level_weight, std::move(anchors));
}

/// Gap between the AB-condition root at C and the diagonal endpoint, in shifted price units.
inline double endpoint_gap_at_c(const PsiEvaluator& psi) {
    const ModelParams& p = psi.params();
    return solve_side_ab(psi, corner_C(p)).ftilde - diagonal_endpoint_ftilde(p);
}

struct AdmissibilityReport {
    bool ok = true;
    double min_slope_own = std::numeric_limits<double>::infinity();  ///< dF/d(own) over probes
    double min_slope_opp = std::numeric_limits<double>::infinity();  ///< dF/d(opp) over probes
    double gap_at_c = 0.0;  ///< |cap_limit_at_c - F(C)|
    std::string first_violation;
};

/// Probes strict monotonicity of the trailing boundary in both variables and its continuity at C.
inline AdmissibilityReport check_admissibility(const BoundaryCurve& F, int probes = 100, double gap_tol = 1e-3) {
    const ModelParams& p = F.params();
    AdmissibilityReport rep;
    const double d = p.theta / 2 / probes;
    auto fail = [&](const std::string& what) {
        if (rep.ok) rep.first_violation = what;
        rep.ok = false;
    };
    for (int i = 0; i <= probes; ++i) {
        const double own = i * d;
        for (double opp = own; opp + own <= p.theta + 1e-15; opp += d) {
            const double f0 = F.trailing(own, opp);
            if (!std::isfinite(f0)) fail("non-finite boundary");
            if (own + d <= opp && own + d + opp <= p.theta + 1e-15) {
                const double s = (F.trailing(own + d, opp) - f0) / d;
                rep.min_slope_own = std::min(rep.min_slope_own, s);
                if (!(s > 0)) {
                    std::ostringstream m;
                    m << "not increasing in own level at (" << own << ", " << opp << ")";
                    fail(m.str());
                }
            }
            if (opp + d + own <= p.theta + 1e-15) {
                const double s = (F.trailing(own, opp + d) - f0) / d;
                rep.min_slope_opp = std::min(rep.min_slope_opp, s);
                if (!(s > 0)) {
                    std::ostringstream m;
                    m << "not increasing in opponent level at (" << own << ", " << opp << ")";
                    fail(m.str());
                }
            }
        }
    }
    rep.gap_at_c = std::abs(F.cap_limit_at_c() - F.diag(p.theta / 2));
    if (rep.gap_at_c > gap_tol) {
        std::ostringstream m;
        m << "discontinuous at C: cap limit " << F.cap_limit_at_c() << " vs diagonal " << F.diag(p.theta / 2);
        fail(m.str());
    }
    return rep;
}

/// Option value m1 of player 1 tabulated on the nodes (i h, j h), i + j <= 2n, h = theta/(2n).
/// Gradients are one-sided per half: "up" tables hold derivatives within {y1 <= y2},
/// "lo" tables within {y1 >= y2}; both exist on the diagonal.
class MGrid {
public:
    MGrid(const ModelParams& p, int n) : p_(p), n_(n), h_(p.theta / 2 / n), N_(2 * n) {
        const std::size_t sz = std::size_t(N_ + 1) * std::size_t(N_ + 1);
        m_.assign(sz, std::numeric_limits<double>::quiet_NaN());
        up1_ = up2_ = lo1_ = lo2_ = m_;
        diag_total_.assign(n + 1, 0.0);
    }

    int n() const { return n_; }
    double h() const { return h_; }
    const ModelParams& params() const { return p_; }
    bool valid(int i, int j) const { return i >= 0 && j >= 0 && i + j <= N_; }

    double at(int i, int j) const { return m_[idx(i, j)]; }
    double up_d1(int i, int j) const { return up1_[idx(i, j)]; }
    double up_d2(int i, int j) const { return up2_[idx(i, j)]; }
    double lo_d1(int i, int j) const { return lo1_[idx(i, j)]; }
    double lo_d2(int i, int j) const { return lo2_[idx(i, j)]; }
    /// (d/dy1 + d/dy2) m1 at diagonal node (i, i) from the diagonal transport equation
    double diag_total(int i) const { return diag_total_[std::size_t(i)]; }

    /// m1(y) by linear interpolation on the triangulated grid.
    double value(SimplexPoint y) const { return interpolate(y, m_); }

    /// (d/dy1 m1, d/dy2 m1), one-sided from the half containing y.
    std::pair<double, double> gradient(SimplexPoint y) const {
        const bool upper = y.y1 <= y.y2;
        return {interpolate(y, upper ? up1_ : lo1_), interpolate(y, upper ? up2_ : lo2_)};
    }

    // construction access
    double& ref(int i, int j) { return m_[idx(i, j)]; }
    double& ref_up1(int i, int j) { return up1_[idx(i, j)]; }
    double& ref_up2(int i, int j) { return up2_[idx(i, j)]; }
    double& ref_lo1(int i, int j) { return lo1_[idx(i, j)]; }
    double& ref_lo2(int i, int j) { return lo2_[idx(i, j)]; }
    double& ref_diag_total(int i) { return diag_total_[std::size_t(i)]; }

private:
    std::size_t idx(int i, int j) const { return std::size_t(i) * std::size_t(N_ + 1) + std::size_t(j); }

    double interpolate(SimplexPoint y, const std::vector<double>& t) const {
        const double u = std::clamp(y.y1 / h_, 0.0, double(N_));
        const double v = std::clamp(y.y2 / h_, 0.0, double(N_) - u);
        const int i = std::min(int(u), N_);
        const int j = std::min(int(v), N_ - i);
        if (i + j == N_) return t[idx(i, j)];  // node on the cap face
        const double a = u - i, b = v - j;
        if (i + j + 1 == N_) {  // cell cut by the cap face: triangle (0,0),(1,0),(0,1)
            return t[idx(i, j)] + a * (t[idx(i + 1, j)] - t[idx(i, j)]) + b * (t[idx(i, j + 1)] - t[idx(i, j)]);
        }
        if (b >= a)  // triangle (0,0),(0,1),(1,1)
            return t[idx(i, j)] + b * (t[idx(i, j + 1)] - t[idx(i, j)]) + a * (t[idx(i + 1, j + 1)] - t[idx(i, j + 1)]);
        return t[idx(i, j)] + a * (t[idx(i + 1, j)] - t[idx(i, j)]) + b * (t[idx(i + 1, j + 1)] - t[idx(i + 1, j)]);
    }

    ModelParams p_;
    int n_;
    double h_;
    int N_;
    std::vector<double> m_, up1_, up2_, lo1_, lo2_, diag_total_;
};

namespace detail {

/// Coefficients of a linear transport equation m' = -a m + b at one point.
struct LinearCoef {
    double a;
    double b;
    double rhs(double m) const { return -a * m + b; }
};

/// Smooth fit of player 1 on its own boundary (upper half), derivative in y1.
inline LinearCoef coef_upper(const PsiEvaluator& psi, const BoundaryCurve& F, SimplexPoint y) {
    const ModelParams& p = psi.params();
    const double z = F.upper(y) + p.beta * y.total();
    const PsiValues v = psi.eval(z);
    return {p.beta * v.ratio(1, 0), (p.c - r_tilde_1(p, z, y)) / v[0]};
}

/// Indifference of player 1 on player 2's boundary (lower half), derivative in y2.
inline LinearCoef coef_lower(const PsiEvaluator& psi, const BoundaryCurve& F, SimplexPoint y) {
    const ModelParams& p = psi.params();
    const double z = F.lower(y) + p.beta * y.total();
    const PsiValues v = psi.eval(z);
    return {p.beta * v.ratio(1, 0), p.beta * p.k * y.y1 / (p.rho * (p.rho + p.k) * v[0])};
}

/// Joint installation on the diagonal, derivative along (1,1).
inline LinearCoef coef_diag(const PsiEvaluator& psi, const BoundaryCurve& F, double s) {
    const ModelParams& p = psi.params();
    const double z = F.diag_ftilde(s);
    const PsiValues v = psi.eval(z);
    const double src = p.beta * p.k * s / (p.rho * (p.rho + p.k)) + p.c - r_tilde_1(p, z, {s, s});
    return {2 * p.beta * v.ratio(1, 0), src / v[0]};
}

/// RK4 step of length h in the negative direction; c0, cm, c1 are the coefficients
/// at the start, midpoint and end of the step.
inline double rk4_back(double m, double h, const LinearCoef& c0, const LinearCoef& cm, const LinearCoef& c1) {
    const double k1 = c0.rhs(m);
    const double k2 = cm.rhs(m - h / 2 * k1);
    const double k3 = cm.rhs(m - h / 2 * k2);
    const double k4 = c1.rhs(m - h * k3);
    return m - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Derivative of samples f(lo..hi) at position q, second order where the stencil allows.
template <class Get>
double one_sided_fd(Get f, int q, int lo, int hi, double h) {
    if (q - 1 >= lo && q + 1 <= hi) return (f(q + 1) - f(q - 1)) / (2 * h);
    if (q + 2 <= hi) return (-3 * f(q) + 4 * f(q + 1) - f(q + 2)) / (2 * h);
    if (q - 2 >= lo) return (3 * f(q) - 4 * f(q - 1) + f(q - 2)) / (2 * h);
    if (q + 1 <= hi) return (f(q + 1) - f(q)) / h;
    if (q - 1 >= lo) return (f(q) - f(q - 1)) / h;
    return 0.0;
}

inline void check_m(double m, double y1, double y2) {
    if (!std::isfinite(m) || std::abs(m) > 1e6) {
        std::ostringstream msg;
        msg << "solve_m: option value blows up at y = (" << y1 << ", " << y2 << ")";
        throw NumericalError(msg.str());
    }
}

}  // namespace detail

/// Integrates the transport equations for m1: along the diagonal from C (m1 = 0), then
/// leftward in y1 across the upper half and downward in y2 across the lower half, starting
/// from the diagonal or from the cap face where m1 = 0.
inline MGrid solve_m(const PsiEvaluator& psi, const BoundaryCurve& F, int n) {
    if (n < 2) throw ParameterError("solve_m: n must be >= 2");
    const ModelParams& p = psi.params();
    MGrid g(p, n);
    const double h = g.h();
    const int N = 2 * n;
    auto y_of = [&](double i, double j) { return SimplexPoint{i * h, j * h}; };

    // diagonal
    std::vector<double> md(n + 1);
    {
        md[n] = 0.0;
        detail::LinearCoef c1 = detail::coef_diag(psi, F, p.theta / 2);
        g.ref_diag_total(n) = c1.rhs(0.0);
        for (int i = n; i > 0; --i) {
            const auto cm = detail::coef_diag(psi, F, (i - 0.5) * h);
            const auto c0 = detail::coef_diag(psi, F, (i - 1) * h);
            md[i - 1] = detail::rk4_back(md[i], h, c1, cm, c0);
            detail::check_m(md[i - 1], (i - 1) * h, (i - 1) * h);
            g.ref_diag_total(i - 1) = c0.rhs(md[i - 1]);
            c1 = c0;
        }
    }

    // upper half: rows y2 = j h, integrate in y1 from the diagonal (j <= n) or the cap face (j > n)
    for (int j = 0; j <= N; ++j) {
        const int i0 = std::min(j, N - j);
        double m = j <= n ? md[i0] : 0.0;
        if (j == n) m = 0.0;
        g.ref(i0, j) = m;
        auto c1 = detail::coef_upper(psi, F, y_of(i0, j));
        g.ref_up1(i0, j) = c1.rhs(m);
        for (int i = i0; i > 0; --i) {
            const auto cm = detail::coef_upper(psi, F, y_of(i - 0.5, j));
            const auto c0 = detail::coef_upper(psi, F, y_of(i - 1, j));
            m = detail::rk4_back(m, h, c1, cm, c0);
            detail::check_m(m, (i - 1) * h, j * h);
            g.ref(i - 1, j) = m;
            g.ref_up1(i - 1, j) = c0.rhs(m);
            c1 = c0;
        }
    }

    // lower half: columns y1 = i h, integrate in y2 from the diagonal (i <= n) or the cap face (i > n)
    for (int i = 0; i <= N; ++i) {
        const int j0 = std::min(i, N - i);
        double m = i <= n ? md[j0] : 0.0;
        if (i == n) m = 0.0;
        g.ref(i, j0) = m;
        auto c1 = detail::coef_lower(psi, F, y_of(i, j0));
        g.ref_lo2(i, j0) = c1.rhs(m);
        for (int j = j0; j > 0; --j) {
            const auto cm = detail::coef_lower(psi, F, y_of(i, j - 0.5));
            const auto c0 = detail::coef_lower(psi, F, y_of(i, j - 1));
            m = detail::rk4_back(m, h, c1, cm, c0);
            detail::check_m(m, i * h, (j - 1) * h);
            g.ref(i, j - 1) = m;
            g.ref_lo2(i, j - 1) = c0.rhs(m);
            c1 = c0;
        }
    }

    // cross derivatives by finite differences inside each half; on the cap face m1 = 0
    // along the face, so the cross derivative equals the transported one
    for (int i = 0; i <= N; ++i)
        for (int j = i; i + j <= N; ++j) {
            if (i + j == N) {
                g.ref_up2(i, j) = g.up_d1(i, j);
                continue;
            }
            g.ref_up2(i, j) = detail::one_sided_fd([&](int q) { return g.at(i, q); }, j, i, N - i, h);
        }
    for (int j = 0; j <= N; ++j)
        for (int i = j; i + j <= N; ++i) {
            if (i + j == N) {
                g.ref_lo1(i, j) = g.lo_d2(i, j);
                continue;
            }
            g.ref_lo1(i, j) = detail::one_sided_fd([&](int q) { return g.at(q, j); }, i, j, N - j, h);
        }
    return g;
}

}  // namespace capgame
