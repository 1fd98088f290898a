// Acceptance run: one PASS/FAIL line per criterion, with the measured quantities and runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <capgame/io.hpp>
#include <capgame/montecarlo.hpp>
#include <capgame/static_game.hpp>
#include <capgame/valuefn.hpp>

using namespace capgame;

namespace {

const ModelParams P = reference_params();

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0) o.require(secs < budget_s, "runtime over " + std::to_string(int(budget_s)) + " s");
    if (!o.pass) ++failures;
    std::printf("[%s] AC%d %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(), secs);
    std::fflush(stdout);
}

const PsiEvaluator& psi() {
    static const PsiEvaluator e(P);
    return e;
}

const ValueField& field() {
    static const ValueField V = build_value_field(psi());
    return V;
}

SimConfig mc_config(double dt = 1e-3, std::size_t n = 100000) {
    SimConfig c;
    c.dt = dt;
    c.n_paths = n;
    c.seed = 42;
    return c;
}

/// Best response by exhaustive search over a grid of installation levels.
double grid_best_response(const statics::StaticState& s, double opp, Player who, double step) {
    const double room = P.theta - s.y.total() - opp;
    double best = 0, best_val = -1e300;
    for (int k = 0; k * step <= room + 1e-12; ++k) {
        const double i = k * step;
        const statics::StaticInstallation inst = who == Player::One ? statics::StaticInstallation{i, opp}
                                                                    : statics::StaticInstallation{opp, i};
        const double v = statics::static_payoff(P, s, inst, who);
        if (v > best_val) best_val = v, best = i;
    }
    return best;
}

double bisect(const std::function<bool(double)>& above, double lo, double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

int main() {
    std::printf("capgame %s acceptance, parameters %s\n", kVersion, "k=c=rho=mu=theta=sigma=1, beta=0.5");

    criterion(1, "fundamental solution self-consistency", 5, [](Outcome& o) {
        double worst = 0;
        bool positive = true;
        for (int i = 0; i < 200; ++i) {
            const double x = -4.0 + 10.0 * i / 199;
            const double v = psi().psi(x);
            worst = std::max(worst, std::abs(psi().ode_residual(x)) / std::max(1.0, v));
            positive = positive && psi().q0(x) > 0 && psi().q1(x) > 0;
        }
        const double e0 = std::abs(psi().psi(1.0) - std::sqrt(M_PI / 2)), e1 = std::abs(psi().psi(1.0, 1) - std::sqrt(2.0));
        o.detail << " max scaled residual " << worst << ", |psi(mu)-sqrt(pi/2)| " << e0 << ", |psi'(mu)-sqrt2| " << e1;
        o.require(worst <= 1e-6, "residual");
        o.require(e0 <= 1e-8 && e1 <= 1e-8, "values at mu");
        o.require(positive, "Q0, Q1 positive");
    });

    criterion(2, "one-shot game against brute force", 60, [](Outcome& o) {
        const int n = 50;
        const double step = P.theta / 200;
        std::size_t states = 0, compared = 0, saturating = 0, alternatives = 0, cert_fail = 0, mismatch = 0;
        double worst = 0;
        for (int ix = 0; ix < n; ++ix) {
            const double x = -1.0 + 4.0 * ix / (n - 1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; i + j < n; ++j) {
                    const statics::StaticState s{x, {P.theta * i / (n - 1), P.theta * j / (n - 1)}};
                    const statics::StaticInstallation e = statics::static_equilibrium(P, s);
                    ++states;
                    if (!statics::nash_certificate(P, s, e)) ++cert_fail;
                    const bool sat = e.total() > 0 && s.y.total() + e.total() >= P.theta - 1e-12;
                    if (sat) {
                        ++saturating;
                        // another saturating selection: player 1 moves halfway to the largest level
                        // it may hold (2A - theta, or the room left by player 2's initial level)
                        const double y1c = s.y.y1 + e.i1;
                        const double hi1 = std::min(P.theta - s.y.y2, 2 * statics::a_of_x(P, x) - P.theta);
                        if (hi1 > y1c) {
                            const double y1a = 0.5 * (y1c + hi1);
                            const statics::StaticInstallation alt{y1a - s.y.y1, P.theta - y1a - s.y.y2};
                            ++alternatives;
                            if (!statics::nash_certificate(P, s, alt)) ++cert_fail;
                        }
                        continue;
                    }
                    statics::StaticInstallation g{0, 0};
                    for (int it = 0; it < 500; ++it) {
                        const double n1 = grid_best_response(s, g.i2, Player::One, step);
                        const double n2 = grid_best_response(s, n1, Player::Two, step);
                        const bool done = n1 == g.i1 && n2 == g.i2;
                        g = {n1, n2};
                        if (done) break;
                    }
                    ++compared;
                    const double d = std::max(std::abs(g.i1 - e.i1), std::abs(g.i2 - e.i2));
                    worst = std::max(worst, d);
                    if (d > 2 * step) ++mismatch;
                }
        }
        o.detail << " " << states << " states, " << compared << " compared (max gap " << worst << ", grid step "
                 << step << "), " << saturating << " saturating (" << alternatives
                 << " alternative selections), " << cert_fail << " certificate failures";
        o.require(mismatch == 0, "equilibrium differs from iterated best response");
        o.require(cert_fail == 0, "certificate");
        o.require(alternatives > 0, "alternative saturating selections exercised");
    });

    criterion(3, "planner and equilibrium saturation thresholds", 0, [](Outcome& o) {
        const statics::StaticState origin{0, {0, 0}};
        auto pareto_sat = [&](double x) {
            return statics::pareto_install(P, {x, origin.y}) >= P.theta - 1e-12;
        };
        auto nash_sat = [&](double x) {
            return statics::static_equilibrium(P, {x, origin.y}).total() >= P.theta - 1e-12;
        };
        const double lo = statics::a_inverse(P, 0), hi = statics::a_inverse(P, 2 * P.theta);
        const double xp = bisect(pareto_sat, lo, hi, 1e-9), xn = bisect(nash_sat, lo, hi, 1e-9);
        const double ap = statics::a_of_x(P, xp), an = statics::a_of_x(P, xn);
        o.detail << " planner saturates at A = " << ap << ", equilibrium at A = " << an;
        o.require(std::abs(ap - P.theta) <= 1e-6, "planner threshold");
        o.require(std::abs(an - 0.75 * P.theta) <= 1e-6, "equilibrium threshold");
    });

    criterion(4, "boundary anchors", 30, [](Outcome& o) {
        const PsiEvaluator local(P);
        const BoundaryCurve F = solve_boundary(local);
        const double fc = F.diag(P.theta / 2);
        const SideRoot r = solve_side_ab(local, {P.theta / 4, 3 * P.theta / 4});
        const double rem = remark_inconsistency_check(local);
        o.detail << " F(C) = " << fc << ", cap-face root = " << r.ftilde << ", cap-face limit = " << rem;
        o.require(fc == 1.5, "F(C)");
        o.require(std::abs(r.ftilde - 2.4597) <= 1e-3, "cap-face root");
        o.require(rem > 0.4, "cap-face limit");
    });

    criterion(5, "construction residuals", 0, [](Outcome& o) {
        const ValueField& V = field();
        const ValueDiagnostics d = diagnose(V, default_probe_box(V.boundary()));
        const MGrid& g = V.mgrid();
        double ab = 0;
        for (int i = 0; i <= 2 * g.n(); ++i) ab = std::max(ab, std::abs(g.at(i, 2 * g.n() - i)));
        const double c8 = std::abs(V.diagonal_condition_at_c());
        // refinement: halve the step twice
        const DiagonalTable a = solve_diagonal(psi(), 25), b = solve_diagonal(psi(), 50), c = solve_diagonal(psi(), 100);
        double e1 = 0, e2 = 0;
        for (int i = 0; i <= 25; ++i) {
            e1 = std::max(e1, std::abs(a.f[i] - b.f[2 * i]));
            e2 = std::max(e2, std::abs(b.f[2 * i] - c.f[4 * i]));
        }
        const MGrid ma = solve_m(psi(), V.boundary(), 25), mb = solve_m(psi(), V.boundary(), 50),
                    mc = solve_m(psi(), V.boundary(), 100);
        double f1 = 0, f2 = 0;
        for (int i = 0; i <= 50; ++i)
            for (int j = 0; i + j <= 50; ++j) {
                f1 = std::max(f1, std::abs(ma.at(i, j) - mb.at(2 * i, 2 * j)));
                f2 = std::max(f2, std::abs(mb.at(2 * i, 2 * j) - mc.at(4 * i, 4 * j)));
            }
        const double order_f = std::log2(e1 / e2), order_m = std::log2(f1 / f2);
        o.detail << " smooth fit " << d.max_smooth_fit << ", diagonal condition at C " << c8 << ", max |m1| on cap "
                 << ab << ", scaled PDE residual " << d.max_pde_scaled << ", refinement order boundary " << order_f
                 << " option value " << order_m;
        o.require(d.max_smooth_fit <= 1e-4, "smooth fit");
        o.require(c8 <= 1e-4, "diagonal condition");
        o.require(ab <= 1e-12, "m1 on cap face");
        o.require(d.max_pde_scaled <= 1e-6, "PDE residual");
        o.require(order_f >= 2 && order_m >= 2, "refinement order");
    });

    criterion(6, "Monte Carlo calibration", 300, [](Outcome& o) {
        const std::vector<statics::StaticState> states = {
            {0.2, {0.3, 0.4}}, {1.3, {0.0, 0.0}}, {1.5, {0.2, 0.1}}, {-0.5, {0.6, 0.3}}, {2.5, {0.1, 0.0}}};
        const SimConfig cfg = mc_config();
        double worst = 0;
        bool ok = true;
        for (const auto& s : states) {
            const statics::StaticInstallation e = statics::static_equilibrium(P, s);
            const std::vector<Arm> arms = {{"zero", Policy::never(), Policy::never()},
                                           {"lump", Policy::lump_only(e.i1), Policy::lump_only(e.i2)}};
            const auto res = simulate_arms(s.x, s.y, field().boundary(), cfg, arms);
            for (Player who : {Player::One, Player::Two}) {
                const PayoffEstimate z = estimate(res[0], who, P, cfg), l = estimate(res[1], who, P, cfg);
                // a zero-variance arm (no capacity, nothing installed) must match exactly
                const auto ratio = [](double err, double se) {
                    if (se > 0) return err / se;
                    return err <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
                };
                const double zr = ratio(std::abs(z.mean - r_i(P, s.x, s.y, who)), z.std_error);
                const double lr = ratio(std::abs(l.mean - statics::static_payoff(P, s, e, who)), l.std_error);
                worst = std::max({worst, zr, lr});
                ok = ok && zr <= 3 && lr <= 3;
            }
        }
        o.detail << " 5 states x 2 players x {zero control, one-shot lump}, n = 1e5: max |error|/SE = " << worst;
        o.require(ok, "error above 3 standard errors");
    });

    criterion(7, "Nash property against unilateral deviations", 900, [](Outcome& o) {
        const ValueField& V = field();
        const BoundaryCurve& F = V.boundary();
        const SimplexPoint ylo{0.3, 0.1};
        const double xmid = 0.5 * (F.lower(ylo) + F.diag(0.3));
        const std::vector<std::pair<double, SimplexPoint>> states = {
            {0.5, {0.1, 0.2}}, {2.0, {0.0, 0.0}}, {1.2, {0.1, 0.6}}, {xmid, ylo}, {xmid, reflect(ylo)}};
        const SimConfig cfg = mc_config();
        const double allow = discretization_allowance(P, cfg.dt);
        std::vector<bool> seen(4, false);
        std::size_t value_fail = 0, dev_fail = 0, dev_total = 0;
        for (const auto& [x0, y0] : states) {
            seen[std::size_t(V.classify(x0, y0).label)] = true;
            for (Player who : {Player::One, Player::Two}) {
                const NashReport rep = nash_test(x0, y0, F, cfg, default_deviations(), who);
                const double v = V.value(x0, y0, who);
                const bool vok = std::abs(rep.equilibrium.mean - v) <= 3 * rep.equilibrium.std_error + allow;
                value_fail += !vok;
                std::ostringstream bad;
                for (const auto& d : rep.deviations) {
                    ++dev_total;
                    if (!d.not_profitable) {
                        ++dev_fail;
                        bad << " " << d.name << "(" << d.diff_mean / d.diff_se << " SE)";
                    }
                }
                std::printf("    x0=%.4f y=(%.2f,%.2f) %s player %d: MC %.5f +- %.5f, V %.5f%s; profitable:%s\n", x0,
                            y0.y1, y0.y2, to_string(V.classify(x0, y0).label).c_str(), int(who), rep.equilibrium.mean,
                            rep.equilibrium.std_error, v, vok ? "" : " (value mismatch)",
                            bad.str().empty() ? " none" : bad.str().c_str());
                std::fflush(stdout);
            }
        }
        o.detail << " 5 states x 2 players, n = 1e5, dt = 1e-3: " << value_fail << " value mismatches, " << dev_fail
                 << " of " << dev_total << " deviation arms profitable beyond 2 SE";
        o.require(seen[0] && seen[1] && seen[2] && seen[3], "four regions covered");
        o.require(value_fail == 0, "equilibrium payoff vs value");
        o.require(dev_fail == 0, "profitable deviations");
    });

    criterion(8, "strategy invariants", 0, [](Outcome& o) {
        const BoundaryCurve& F = field().boundary();
        const std::vector<std::pair<double, SimplexPoint>> states = {
            {1.0, {0.1, 0.2}}, {2.0, {0.0, 0.0}}, {1.2, {0.1, 0.6}}, {1.35, {0.3, 0.1}}};
        const double dts[] = {4e-3, 1e-3, 2.5e-4};
        double inc[3] = {0, 0, 0};
        std::size_t nonmono = 0;
        double simplex = -1, excess = -1e300;
        for (int k = 0; k < 3; ++k)
            for (const auto& [x0, y0] : states) {
                const auto res = simulate_arms(x0, y0, F, mc_config(dts[k], 2000),
                                               {{"equilibrium", Policy::equilibrium(), Policy::equilibrium()}});
                const ArmResult& r = res[0];
                nonmono += r.monotonicity_violations;
                simplex = std::max(simplex, r.max_simplex_excess);
                excess = std::max(excess, r.max_boundary_excess);
                inc[k] += detail::mean_se(r.max_increment, false).first / double(states.size());
            }
        const double rate = std::log(inc[0] / inc[2]) / std::log(dts[0] / dts[2]);
        o.detail << " decreasing steps " << nonmono << ", max Y1+Y2-theta " << simplex << ", max X - boundary "
                 << excess << ", mean max post-zero increment " << inc[0] << " / " << inc[1] << " / " << inc[2]
                 << " (rate " << rate << ")";
        o.require(nonmono == 0, "monotone capacity");
        o.require(simplex <= 1e-12, "capacity cap");
        o.require(excess <= 1e-9, "price above boundary");
        o.require(inc[0] > inc[1] && inc[1] > inc[2] && rate >= 0.4, "increments shrink like sqrt(dt)");
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
