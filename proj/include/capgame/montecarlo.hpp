#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace capgame {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 0.0;  ///< 0 selects default_horizon
    std::size_t n_paths = 100000;
    std::uint64_t seed = 42;
    bool antithetic = false;  ///< paths 2m and 2m+1 use opposite noise
};

/// Smallest T with e^{-rho T} theta (|mu| + 5 sigma/sqrt(2k)) / rho <= tol.
inline double default_horizon(const ModelParams& p, double tol = 1e-4) {
    const double scale = p.theta * (std::abs(p.mu) + 5 * p.sigma / std::sqrt(2 * p.k)) / p.rho;
    return std::max(1.0, std::log(scale / tol) / p.rho);
}

inline SimConfig resolve(const ModelParams& p, SimConfig cfg) {
    if (!(cfg.dt > 0)) throw ParameterError("dt must be positive");
    if (cfg.dt >= 1 / (2 * p.k)) throw ParameterError("dt must be below 1/(2k) for the explicit scheme");
    if (cfg.horizon == 0) cfg.horizon = default_horizon(p);
    if (!(cfg.horizon > 0)) throw ParameterError("horizon must be positive");
    if (cfg.n_paths == 0) throw ParameterError("n_paths must be positive");
    if (cfg.antithetic && cfg.n_paths % 2 != 0) throw ParameterError("antithetic sampling needs an even path count");
    return cfg;
}

inline std::size_t step_count(const SimConfig& cfg) { return std::size_t(std::ceil(cfg.horizon / cfg.dt - 1e-9)); }

/// Control rule of one player.
struct Policy {
    enum class Kind {
        Equilibrium,  ///< running-sup rule of the boundary, optionally shifted and with an extra t=0 lump
        Never,        ///< no installation at all
        LumpOnly,     ///< a fixed installation at t=0, nothing afterwards
    };
    Kind kind = Kind::Equilibrium;
    double shift = 0.0;  ///< Equilibrium: the boundary used is F + shift
    double lump = 0.0;   ///< Equilibrium: own level at least y0 + lump after t=0; LumpOnly: installation size

    static Policy equilibrium() { return {}; }
    static Policy shifted(double d) { return {Kind::Equilibrium, d, 0.0}; }
    static Policy with_lump(double l) { return {Kind::Equilibrium, 0.0, l}; }
    static Policy never() { return {Kind::Never, 0.0, 0.0}; }
    static Policy lump_only(double l) { return {Kind::LumpOnly, 0.0, l}; }
};

struct Arm {
    std::string name;
    Policy player1;
    Policy player2;
};

/// Per-path outcomes of one arm.
struct ArmResult {
    std::string name;
    std::vector<double> payoff1, payoff2;
    std::vector<double> terminal_x, terminal_y1, terminal_y2;
    std::vector<double> max_increment;  ///< largest per-step installation after t=0 (both players)
    double max_abs_x = 0.0;
    double max_boundary_excess = -std::numeric_limits<double>::infinity();  ///< X - trigger after t=0
    double max_simplex_excess = -std::numeric_limits<double>::infinity();   ///< Y1 + Y2 - theta
    std::size_t monotonicity_violations = 0;
};

/// One simulated path with its full trajectory.
struct SimPath {
    std::vector<double> times, x, y1, y2, i1, i2;
};

struct PayoffEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    double truncation_bias_bound = 0.0;
};

namespace detail {

/// Sum in a fixed pairwise order (deterministic and accurate).
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

/// Mean and standard error; antithetic pairs are averaged first.
inline std::pair<double, double> mean_se(const std::vector<double>& v, bool antithetic) {
    std::vector<double> s;
    const std::vector<double>* src = &v;
    if (antithetic) {
        s.resize(v.size() / 2);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.5 * (v[2 * i] + v[2 * i + 1]);
        src = &s;
    }
    const std::size_t n = src->size();
    const double mean = pairwise_sum(src->data(), n) / double(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = ((*src)[i] - mean) * ((*src)[i] - mean);
    const double var = n > 1 ? pairwise_sum(sq.data(), n) / double(n - 1) : 0.0;
    return {mean, std::sqrt(var / double(n))};
}

struct ArmState {
    double x, y1, y2;
    double trig1, trig2;  ///< price above which each player installs (cached while Y is unchanged)
    double f1, f2;        ///< last integrand values for the trapezoid
    double pay1, pay2;
    double max_inc;
};

class Engine {
public:
    Engine(const BoundaryCurve& F, const SimConfig& cfg, const std::vector<Arm>& arms)
        : F_(F), p_(F.params()), cfg_(cfg), arms_(arms) {}

    double trigger(const Policy& pol, double own, double opp) const {
        if (pol.kind != Policy::Kind::Equilibrium) return std::numeric_limits<double>::infinity();
        return F_.trigger(opp, own) + pol.shift;
    }

    double target(const Policy& pol, double x, double own, double opp) const {
        return std::max(own, F_.inverse(x - pol.shift, opp));
    }

    void refresh(ArmState& s, const Arm& a) const {
        s.trig1 = trigger(a.player1, s.y1, s.y2);
        s.trig2 = trigger(a.player2, s.y2, s.y1);
    }

    /// Installation step at the current price: both players react to the pre-step levels.
    /// Returns true if any level changed.
    bool install(ArmState& s, const Arm& a) const {
        const bool go1 = s.x > s.trig1, go2 = s.x > s.trig2;
        if (!go1 && !go2) return false;
        double n1 = go1 ? target(a.player1, s.x, s.y1, s.y2) : s.y1;
        double n2 = go2 ? target(a.player2, s.x, s.y2, s.y1) : s.y2;
        if (std::abs(n1 - n2) <= kGeomEps && std::abs(s.y1 - s.y2) <= kGeomEps) n1 = n2 = std::max(n1, n2);
        clamp_pair(n1, n2, s.y1, s.y2);
        const bool changed = n1 != s.y1 || n2 != s.y2;
        s.y1 = n1;
        s.y2 = n2;
        return changed;
    }

    /// Keep Y1 + Y2 <= theta by shrinking the increments proportionally.
    void clamp_pair(double& n1, double& n2, double o1, double o2) const {
        const double excess = n1 + n2 - p_.theta;
        if (excess <= 0) return;
        const double d1 = n1 - o1, d2 = n2 - o2, d = d1 + d2;
        if (d <= 0) return;
        n1 = o1 + std::max(0.0, d1 - excess * d1 / d);
        n2 = o2 + std::max(0.0, d2 - excess * d2 / d);
        if (n1 + n2 > p_.theta) (d1 >= d2 ? n1 : n2) -= n1 + n2 - p_.theta;
    }

    void initial(ArmState& s, const Arm& a) const {
        const double y10 = s.y1, y20 = s.y2;
        refresh(s, a);
        install(s, a);
        auto apply_lump = [&](const Policy& pol, double& own, double own0, double opp) {
            if (pol.kind == Policy::Kind::Equilibrium && pol.lump > 0)
                own = std::max(own, std::min(own0 + pol.lump, p_.theta - opp));
            if (pol.kind == Policy::Kind::LumpOnly) own = std::min(own0 + pol.lump, p_.theta - opp);
        };
        apply_lump(a.player1, s.y1, y10, s.y2);
        apply_lump(a.player2, s.y2, y20, s.y1);
        s.pay1 = -p_.c * (s.y1 - y10);
        s.pay2 = -p_.c * (s.y2 - y20);
        refresh(s, a);
        s.f1 = s.x * s.y1;
        s.f2 = s.x * s.y2;
        s.max_inc = 0;
    }

    /// Runs all arms on path `path` with shared noise. `rec` (optional) records arm 0.
    void run_path(std::size_t path, double x0, SimplexPoint y0, std::vector<ArmResult>& out, SimPath* rec) const {
        const std::size_t na = arms_.size();
        const std::uint64_t stream = cfg_.antithetic ? path / 2 : path;
        PathNormals z(cfg_.seed, stream, cfg_.antithetic && (path % 2 == 1));
        std::vector<ArmState> st(na);
        for (std::size_t a = 0; a < na; ++a) {
            st[a].x = x0;
            st[a].y1 = y0.y1;
            st[a].y2 = y0.y2;
            initial(st[a], arms_[a]);
        }
        const std::size_t steps = step_count(cfg_);
        const double dt = cfg_.dt, sdt = p_.sigma * std::sqrt(dt);
        const double decay = std::exp(-p_.rho * dt);
        double disc = 1.0;
        std::vector<double> max_abs(na, std::abs(x0));
        std::vector<double> excess(na, -std::numeric_limits<double>::infinity());
        std::vector<std::size_t> nonmono(na, 0);
        if (rec) {
            *rec = SimPath{};
            record(*rec, 0.0, st[0], y0);
        }
        for (std::size_t n = 1; n <= steps; ++n) {
            const double dw = sdt * z();
            const double disc_new = disc * decay;
            for (std::size_t a = 0; a < na; ++a) {
                ArmState& s = st[a];
                s.x += p_.k * (p_.mu - p_.beta * (s.y1 + s.y2) - s.x) * dt + dw;
                const double o1 = s.y1, o2 = s.y2;
                if (install(s, arms_[a])) {
                    const double d1 = s.y1 - o1, d2 = s.y2 - o2;
                    if (d1 < 0 || d2 < 0) ++nonmono[a];
                    s.pay1 -= p_.c * disc_new * d1;
                    s.pay2 -= p_.c * disc_new * d2;
                    s.max_inc = std::max(s.max_inc, std::max(d1, d2));
                    refresh(s, arms_[a]);
                }
                const double g1 = disc_new * s.x * s.y1, g2 = disc_new * s.x * s.y2;
                s.pay1 += 0.5 * dt * (s.f1 + g1);
                s.pay2 += 0.5 * dt * (s.f2 + g2);
                s.f1 = g1;
                s.f2 = g2;
                max_abs[a] = std::max(max_abs[a], std::abs(s.x));
                excess[a] = std::max(excess[a], s.x - std::min(s.trig1, s.trig2));
            }
            disc = disc_new;
            if (rec) record(*rec, double(n) * dt, st[0], y0);
        }
        for (std::size_t a = 0; a < na; ++a) {
            const ArmState& s = st[a];
            ArmResult& r = out[a];
            r.payoff1[path] = s.pay1;
            r.payoff2[path] = s.pay2;
            r.terminal_x[path] = s.x;
            r.terminal_y1[path] = s.y1;
            r.terminal_y2[path] = s.y2;
            r.max_increment[path] = s.max_inc;
            r.max_abs_x = std::max(r.max_abs_x, max_abs[a]);
            r.max_boundary_excess = std::max(r.max_boundary_excess, excess[a]);
            r.max_simplex_excess = std::max(r.max_simplex_excess, s.y1 + s.y2 - p_.theta);
            r.monotonicity_violations += nonmono[a];
        }
    }

private:
    static void record(SimPath& rec, double t, const ArmState& s, SimplexPoint y0) {
        rec.times.push_back(t);
        rec.x.push_back(s.x);
        rec.y1.push_back(s.y1);
        rec.y2.push_back(s.y2);
        rec.i1.push_back(s.y1 - y0.y1);
        rec.i2.push_back(s.y2 - y0.y2);
    }

    const BoundaryCurve& F_;
    ModelParams p_;
    SimConfig cfg_;
    std::vector<Arm> arms_;
};

}  // namespace detail

/// Simulates every arm on the same noise and returns per-path outcomes.
inline std::vector<ArmResult> simulate_arms(double x0, SimplexPoint y0, const BoundaryCurve& F, SimConfig cfg,
                                            const std::vector<Arm>& arms) {
    const ModelParams& p = F.params();
    cfg = resolve(p, cfg);
    check_simplex(y0, p.theta);
    if (!std::isfinite(x0)) throw ParameterError("x0 must be finite");
    if (arms.empty()) throw ParameterError("simulate_arms: no arms");
    std::vector<ArmResult> out(arms.size());
    for (std::size_t a = 0; a < arms.size(); ++a) {
        ArmResult& r = out[a];
        r.name = arms[a].name;
        for (auto* v : {&r.payoff1, &r.payoff2, &r.terminal_x, &r.terminal_y1, &r.terminal_y2, &r.max_increment})
            v->assign(cfg.n_paths, 0.0);
    }
    detail::Engine eng(F, cfg, arms);
    for (std::size_t path = 0; path < cfg.n_paths; ++path) eng.run_path(path, x0, y0, out, nullptr);
    return out;
}

/// Full trajectory of path `path_index` under the equilibrium strategy of both players.
inline SimPath simulate_equilibrium(double x0, SimplexPoint y0, const BoundaryCurve& F, SimConfig cfg,
                                   std::size_t path_index = 0) {
    const ModelParams& p = F.params();
    cfg = resolve(p, cfg);
    check_simplex(y0, p.theta);
    cfg.n_paths = std::max(cfg.n_paths, path_index + 1);
    const std::vector<Arm> arms{{"equilibrium", Policy::equilibrium(), Policy::equilibrium()}};
    std::vector<ArmResult> out(1);
    for (auto* v : {&out[0].payoff1, &out[0].payoff2, &out[0].terminal_x, &out[0].terminal_y1, &out[0].terminal_y2,
                    &out[0].max_increment})
        v->assign(cfg.n_paths, 0.0);
    SimPath path;
    detail::Engine(F, cfg, arms).run_path(path_index, x0, y0, out, &path);
    return path;
}

/// Discounted payoff of one recorded path: trapezoid of e^{-rho t} X Y^i minus c sum e^{-rho t} dI^i.
inline double payoff(const SimPath& path, Player who, const ModelParams& p) {
    const auto& y = who == Player::One ? path.y1 : path.y2;
    const auto& inst = who == Player::One ? path.i1 : path.i2;
    double total = -p.c * inst[0];
    for (std::size_t n = 1; n < path.times.size(); ++n) {
        const double d0 = std::exp(-p.rho * path.times[n - 1]), d1 = std::exp(-p.rho * path.times[n]);
        const double dt = path.times[n] - path.times[n - 1];
        total += 0.5 * dt * (d0 * path.x[n - 1] * y[n - 1] + d1 * path.x[n] * y[n]);
        total -= p.c * d1 * (inst[n] - inst[n - 1]);
    }
    return total;
}

inline double truncation_bound(const ModelParams& p, double horizon, double max_abs_x) {
    return p.theta * max_abs_x * std::exp(-p.rho * horizon) / p.rho;
}

inline PayoffEstimate estimate(const ArmResult& r, Player who, const ModelParams& p, const SimConfig& cfg) {
    const SimConfig c = resolve(p, cfg);
    const auto [m, se] = detail::mean_se(who == Player::One ? r.payoff1 : r.payoff2, c.antithetic);
    return {m, se, r.payoff1.size(), truncation_bound(p, c.horizon, r.max_abs_x)};
}

/// Mean and standard error of the per-path difference a - b for `who`.
inline std::pair<double, double> paired_difference(const ArmResult& a, const ArmResult& b, Player who,
                                                   bool antithetic) {
    const auto& va = who == Player::One ? a.payoff1 : a.payoff2;
    const auto& vb = who == Player::One ? b.payoff1 : b.payoff2;
    std::vector<double> d(va.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = va[i] - vb[i];
    return detail::mean_se(d, antithetic);
}

/// Unilateral deviation of the tested player.
struct Deviation {
    enum class Kind { Shift, Lump, Never };
    Kind kind = Kind::Shift;
    double amount = 0.0;

    std::string name() const {
        std::ostringstream s;
        if (kind == Kind::Never) return "never";
        s << (kind == Kind::Shift ? "shift:" : "lump:") << amount;
        return s.str();
    }
    Policy policy() const {
        switch (kind) {
            case Kind::Shift: return Policy::shifted(amount);
            case Kind::Lump: return Policy::with_lump(amount);
            case Kind::Never: return Policy::never();
        }
        return {};
    }
};

/// "shift:<d>", "lump:<l>" (l >= 0) or "never".
inline Deviation parse_deviation(const std::string& text) {
    if (text == "never") return {Deviation::Kind::Never, 0.0};
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParameterError("deviation must be shift:<d>, lump:<l> or never: " + text);
    const std::string kind = text.substr(0, colon);
    double v = 0;
    try {
        std::size_t used = 0;
        v = std::stod(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ParameterError("bad deviation amount: " + text);
    }
    if (!std::isfinite(v)) throw ParameterError("bad deviation amount: " + text);
    if (kind == "shift") return {Deviation::Kind::Shift, v};
    if (kind == "lump") {
        if (v < 0) throw ParameterError("lump size must be non-negative: " + text);
        return {Deviation::Kind::Lump, v};
    }
    throw ParameterError("unknown deviation kind: " + text);
}

inline std::vector<Deviation> default_deviations() {
    using K = Deviation::Kind;
    return {{K::Shift, 0.05}, {K::Shift, -0.05}, {K::Shift, 0.1}, {K::Shift, -0.1},
            {K::Lump, 0.05},  {K::Lump, 0.1},    {K::Lump, 0.2},  {K::Never, 0.0}};
}

struct DeviationResult {
    std::string name;
    PayoffEstimate payoff;
    double diff_mean = 0.0;  ///< S(deviation) - S(equilibrium)
    double diff_se = 0.0;
    bool not_profitable = false;  ///< diff_mean <= 2 diff_se
};

struct NashReport {
    Player player = Player::One;
    PayoffEstimate equilibrium;
    std::vector<DeviationResult> deviations;
    ArmResult equilibrium_arm;
};

/// Payoff of `player` under the equilibrium and under each unilateral deviation, the other
/// player keeping the equilibrium strategy; all arms share noise.
inline NashReport nash_test(double x0, SimplexPoint y0, const BoundaryCurve& F, const SimConfig& cfg,
                            const std::vector<Deviation>& deviations, Player player = Player::One) {
    std::vector<Arm> arms{{"equilibrium", Policy::equilibrium(), Policy::equilibrium()}};
    for (const Deviation& d : deviations) {
        Arm a{d.name(), Policy::equilibrium(), Policy::equilibrium()};
        (player == Player::One ? a.player1 : a.player2) = d.policy();
        arms.push_back(a);
    }
    const std::vector<ArmResult> res = simulate_arms(x0, y0, F, cfg, arms);
    const ModelParams& p = F.params();
    const SimConfig c = resolve(p, cfg);
    NashReport rep;
    rep.player = player;
    rep.equilibrium = estimate(res[0], player, p, c);
    rep.equilibrium_arm = res[0];
    for (std::size_t a = 1; a < res.size(); ++a) {
        DeviationResult d;
        d.name = res[a].name;
        d.payoff = estimate(res[a], player, p, c);
        std::tie(d.diff_mean, d.diff_se) = paired_difference(res[a], res[0], player, c.antithetic);
        d.not_profitable = d.diff_mean <= 2 * d.diff_se;
        rep.deviations.push_back(d);
    }
    return rep;
}

/// Allowance for the discrete monitoring of the reflecting boundary: C sqrt(dt), with C taken from
/// the overshoot constant 0.5826 sigma of a discretely monitored barrier times the capacity theta.
inline double discretization_allowance(const ModelParams& p, double dt) {
    return 0.5826 * p.sigma * p.theta * std::sqrt(dt);
}

}  // namespace capgame
