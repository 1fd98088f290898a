#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "model.hpp"

/// One-shot version of the game: both producers may install only at time 0.
namespace capgame::statics {

struct StaticState {
    double x = 0.0;
    SimplexPoint y;
};

struct StaticInstallation {
    double i1 = 0.0;
    double i2 = 0.0;

    double of(Player p) const { return p == Player::One ? i1 : i2; }
    double total() const { return i1 + i2; }
};

enum class Label { WW, IW, WI, II };  ///< first letter player 1, second player 2
enum class Component { Free, Prolonged, Saturated, Install };

struct StaticRegion {
    Label label = Label::WW;
    bool saturating = false;  ///< the equilibrium installation fills the capacity cap
    Component player1 = Component::Free;
    Component player2 = Component::Free;
};

inline std::string to_string(Label l) {
    switch (l) {
        case Label::WW: return "WW";
        case Label::IW: return "IW";
        case Label::WI: return "WI";
        case Label::II: return "II";
    }
    return "?";
}

inline std::string to_string(Component c) {
    switch (c) {
        case Component::Free: return "free";
        case Component::Prolonged: return "prol";
        case Component::Saturated: return "sat";
        case Component::Install: return "install";
    }
    return "?";
}

/// Price-dependent installation level: (x rho + mu k - c rho (rho+k)) / (2 beta k).
inline double a_of_x(const ModelParams& p, double x) {
    return (x * p.rho + p.mu * p.k - p.c * p.rho * (p.rho + p.k)) / (2 * p.beta * p.k);
}

inline double a_inverse(const ModelParams& p, double a) {
    return (2 * p.beta * p.k * a + p.c * p.rho * (p.rho + p.k) - p.mu * p.k) / p.rho;
}

inline bool admissible(const ModelParams& p, const StaticState& s, const StaticInstallation& inst) {
    return inst.i1 >= 0 && inst.i2 >= 0 &&
           s.y.total() + inst.total() <= p.theta + kGeomEps;
}

inline double static_payoff(const ModelParams& p, const StaticState& s, const StaticInstallation& inst,
                            Player player) {
    if (!admissible(p, s, inst)) throw ParameterError("static_payoff: inadmissible installation");
    const double own = s.y.own(player) + inst.of(player);
    const double total = s.y.total() + inst.total();
    return own * (s.x * p.rho + p.mu * p.k - p.beta * p.k * total) / (p.rho * (p.rho + p.k)) -
           p.c * inst.of(player);
}

/// Optimal installation of `player` given the opponent installs `opponent_install`.
inline double best_response(const ModelParams& p, const StaticState& s, double opponent_install,
                            Player player) {
    const double yi = s.y.own(player);
    const double Yj = s.y.opp(player) + opponent_install;
    const double a = a_of_x(p, s.x);
    return std::max(0.0, std::min(p.theta - Yj - yi, a - Yj / 2 - yi));
}

/// Equilibrium installation; on the saturation set the selection never lifts a
/// player above theta/2 (or above the room left by a leader already past theta/2).
inline StaticInstallation static_equilibrium(const ModelParams& p, const StaticState& s) {
    const double a = a_of_x(p, s.x);
    const double y1 = s.y.y1, y2 = s.y.y2, half = p.theta / 2;
    const double target = 2.0 * a / 3.0;
    const bool want1 = target > y1, want2 = target > y2;
    auto one_sided = [&](double yi, double yj) {
        return std::max(0.0, std::min(p.theta - (yi + yj), a - yj / 2 - yi));
    };
    if (want1 && want2) {
        if (2 * target <= p.theta) return {target - y1, target - y2};
        if (y1 >= half) return {0.0, std::max(0.0, p.theta - (y1 + y2))};
        if (y2 >= half) return {std::max(0.0, p.theta - (y1 + y2)), 0.0};
        return {half - y1, half - y2};
    }
    if (want1) return {one_sided(y1, y2), 0.0};
    if (want2) return {0.0, one_sided(y2, y1)};
    return {0.0, 0.0};
}

/// (Y' - Y)(2A - Yj - Y' - Y) <= 0 for every admissible unilateral deviation Y' on a
/// grid of step theta/1000, for both players.
inline bool nash_certificate(const ModelParams& p, const StaticState& s, const StaticInstallation& inst,
                             double tol = 1e-12) {
    if (!admissible(p, s, inst)) return false;
    const double a = a_of_x(p, s.x);
    const double step = p.theta / 1000;
    for (Player i : {Player::One, Player::Two}) {
        const double yi = s.y.own(i);
        const double Yi = yi + inst.of(i);
        const double Yj = s.y.opp(i) + inst.of(other(i));
        const double hi = p.theta - Yj;
        auto violates = [&](double Yp) { return (Yp - Yi) * (2 * a - Yj - Yp - Yi) > tol; };
        if (hi >= yi && violates(hi)) return false;
        for (double Yp = yi; Yp <= hi; Yp += step)
            if (violates(Yp)) return false;
    }
    return true;
}

/// Installation boundary of `player` on the half y_i <= y_j: A^{-1}(y_i + y_j/2).
inline double static_boundary_F(const ModelParams& p, Player player, SimplexPoint y) {
    if (y.own(player) > y.opp(player) + kGeomEps)
        throw ParameterError("static_boundary_F: requires own capacity <= opponent capacity");
    return a_inverse(p, y.own(player) + y.opp(player) / 2);
}

inline Component static_component(const ModelParams& p, const StaticState& s, Player i) {
    const double yi = s.y.own(i), yj = s.y.opp(i);
    const double a = a_of_x(p, s.x);
    // no room left: the capacity cap is reached and nobody can install
    if (yi + yj >= p.theta - kGeomEps) return yi <= yj && a < yi + yj / 2 ? Component::Free : Component::Saturated;
    if (yi <= yj) return a < yi + yj / 2 ? Component::Free : Component::Install;
    if (yi > p.theta / 2) return Component::Saturated;
    return a < 1.5 * yi ? Component::Prolonged : Component::Install;
}

inline StaticRegion static_region(const ModelParams& p, const StaticState& s) {
    StaticRegion r;
    r.player1 = static_component(p, s, Player::One);
    r.player2 = static_component(p, s, Player::Two);
    const bool i1 = r.player1 == Component::Install, i2 = r.player2 == Component::Install;
    r.label = i1 ? (i2 ? Label::II : Label::IW) : (i2 ? Label::WI : Label::WW);
    const StaticInstallation eq = static_equilibrium(p, s);
    r.saturating = eq.total() > 0 && s.y.total() + eq.total() >= p.theta - kGeomEps;
    return r;
}

/// Common target when both install: ((2/3)A) capped at theta/2.
inline double diagonal_target(const ModelParams& p, double x) {
    return std::min(2.0 * a_of_x(p, x) / 3.0, p.theta / 2);
}

/// Target of a lone installer facing opponent level yj: (A - yj/2) capped at theta - yj.
inline double sectional_target(const ModelParams& p, double x, double yj) {
    return std::min(a_of_x(p, x) - yj / 2, p.theta - yj);
}

inline double static_value(const ModelParams& p, const StaticState& s, Player player) {
    const StaticRegion reg = static_region(p, s);
    const bool me_installs = (player == Player::One ? reg.player1 : reg.player2) == Component::Install;
    const bool opp_installs = (player == Player::One ? reg.player2 : reg.player1) == Component::Install;
    const double yi = s.y.own(player), yj = s.y.opp(player);
    auto make = [&](double own, double opp) {
        return player == Player::One ? SimplexPoint{own, opp} : SimplexPoint{opp, own};
    };
    if (!me_installs && !opp_installs) return r_i(p, s.x, s.y, player);
    if (!me_installs) return r_i(p, s.x, make(yi, sectional_target(p, s.x, yi)), player);
    if (!opp_installs) {
        const double t = sectional_target(p, s.x, yj);
        return r_i(p, s.x, make(t, yj), player) - p.c * (t - yi);
    }
    const double t = diagonal_target(p, s.x);
    return r_i(p, s.x, make(t, t), player) - p.c * (t - yi);
}

/// Aggregate installation of a planner maximizing the sum of both payoffs.
inline double pareto_install(const ModelParams& p, const StaticState& s) {
    const double a = a_of_x(p, s.x);
    const double ybar = s.y.total();
    return std::max(0.0, std::min(a - ybar, p.theta - ybar));
}

}  // namespace capgame::statics
