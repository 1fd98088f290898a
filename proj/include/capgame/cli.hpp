#pragma once

#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boundary.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "model.hpp"
#include "montecarlo.hpp"
#include "special.hpp"
#include "static_game.hpp"
#include "valuefn.hpp"

namespace capgame::cli {

namespace detail {

struct BoundaryFlags {
    int n = 400;
    std::string rule = "rederived";
    std::string extension = "level-sets";
    int anchors = 41;
    double level_weight = 0.5;

    void add(CLI::App* app) {
        app->add_option("--n", n, "grid cells on the half diagonal")->check(CLI::Range(2, 100000));
        app->add_option("--rule", rule, "diagonal rule")->check(CLI::IsMember({"rederived", "as-displayed"}));
        app->add_option("--extension", extension, "off-diagonal boundary rule")
            ->check(CLI::IsMember({"level-sets", "anchor-blend", "cap-blend"}));
        app->add_option("--anchors", anchors, "number of cap-face anchors")->check(CLI::Range(2, 100000));
        app->add_option("--level-weight", level_weight, "opponent weight of the level-set rule");
    }

    BoundaryOptions options() const {
        BoundaryOptions o;
        o.n = n;
        o.rule = rule == "rederived" ? DiagonalRule::Rederived : DiagonalRule::AsDisplayed;
        o.extension = extension == "level-sets"     ? Extension::LevelSets
                      : extension == "anchor-blend" ? Extension::AnchorBlend
                                                    : Extension::CapBlend;
        o.side_anchors = anchors;
        o.level_weight = level_weight;
        return o;
    }

    std::string describe() const {
        return "n=" + std::to_string(n) + " rule=" + rule + " extension=" + extension +
               " anchors=" + std::to_string(anchors) + " level_weight=" + fmt(level_weight);
    }
};

struct SimFlags {
    double x0 = 0, y1 = 0, y2 = 0;
    double dt = 1e-3;
    double horizon = 0;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    bool antithetic = false;

    void add(CLI::App* app) {
        app->add_option("--x0", x0, "initial price")->required();
        app->add_option("--y1", y1, "initial capacity of player 1")->required();
        app->add_option("--y2", y2, "initial capacity of player 2")->required();
        app->add_option("--dt", dt, "time step");
        app->add_option("--horizon", horizon, "truncation time (0: automatic)");
        app->add_option("--paths", paths, "number of paths");
        app->add_option("--seed", seed, "random seed");
        app->add_flag("--antithetic", antithetic, "antithetic pairs");
    }

    SimConfig config() const { return {dt, horizon, paths, seed, antithetic}; }

    std::string describe(const ModelParams& p) const {
        const SimConfig c = resolve(p, config());
        return "x0=" + fmt(x0) + " y1=" + fmt(y1) + " y2=" + fmt(y2) + " dt=" + fmt(c.dt) +
               " horizon=" + fmt(c.horizon) + " paths=" + std::to_string(c.n_paths) + " seed=" + std::to_string(c.seed) +
               (c.antithetic ? " antithetic" : "");
    }
};

inline std::string side_path(const std::string& out) {
    const auto dot = out.rfind(".csv");
    if (dot != std::string::npos && dot + 4 == out.size()) return out.substr(0, dot) + "_side.csv";
    return out + "_side.csv";
}

inline std::string nan_or(double v) { return std::isfinite(v) ? fmt(v) : std::string("nan"); }

inline std::string region_name(const statics::StaticRegion& r) { return statics::to_string(r.label); }

}  // namespace detail

/// Runs the command line; returns the process exit code (0 ok, 1 numerical failure, 2 usage error).
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Two-player capacity investment game with price impact", "capgame"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config;
    bool as_json = false;
    auto add_config = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--config", config, "JSON parameter file")->check(CLI::ExistingFile);
        if (required) opt->required();
        sub->add_flag("--json", as_json, "print a JSON summary");
    };

    // psi
    auto* psi_cmd = app.add_subcommand("psi", "fundamental solution and derivatives");
    add_config(psi_cmd, false);
    double psi_x = 0, psi_tol = 1e-10;
    int psi_order = 0;
    ModelParams flag_params;
    psi_cmd->add_option("--x", psi_x, "point")->required();
    psi_cmd->add_option("--order", psi_order, "derivative order 0..3")->check(CLI::Range(0, 3));
    psi_cmd->add_option("--tol", psi_tol, "relative quadrature tolerance");
    for (auto [name, dst] : std::vector<std::pair<std::string, double*>>{{"--k", &flag_params.k},
                                                                        {"--mu", &flag_params.mu},
                                                                        {"--sigma", &flag_params.sigma},
                                                                        {"--beta", &flag_params.beta},
                                                                        {"--rho", &flag_params.rho},
                                                                        {"--c", &flag_params.c},
                                                                        {"--theta", &flag_params.theta}})
        psi_cmd->add_option(name, *dst, "model parameter");

    // static-game
    auto* static_cmd = app.add_subcommand("static-game", "one-shot game at time 0");
    add_config(static_cmd, true);
    std::optional<double> sx, sy1, sy2;
    int grid_n = 0;
    std::string static_out = "static.csv";
    static_cmd->add_option("--x", sx, "price");
    static_cmd->add_option("--y1", sy1, "capacity of player 1");
    static_cmd->add_option("--y2", sy2, "capacity of player 2");
    static_cmd->add_option("--grid", grid_n, "emit an n x n x n grid CSV")->check(CLI::Range(2, 1000));
    static_cmd->add_option("--out", static_out, "CSV path for --grid");

    // boundary
    auto* boundary_cmd = app.add_subcommand("boundary", "free boundary and option value");
    boundary_cmd->require_subcommand(1);
    detail::BoundaryFlags bflags;
    auto* bsolve = boundary_cmd->add_subcommand("solve", "diagonal boundary and cap-face anchors");
    add_config(bsolve, true);
    bflags.add(bsolve);
    std::string bsolve_out = "boundary.csv";
    bsolve->add_option("--out", bsolve_out, "CSV path");
    auto* bm = boundary_cmd->add_subcommand("m", "option value grid");
    add_config(bm, true);
    bflags.add(bm);
    std::string bm_out = "m.csv";
    int m_n = 0;
    bm->add_option("--out", bm_out, "CSV path");
    bm->add_option("--m-n", m_n, "grid cells on the half diagonal for the option value (0: same as --n)");

    // value
    auto* value_cmd = app.add_subcommand("value", "candidate value function");
    value_cmd->require_subcommand(1);
    int probe_nx = 41, probe_ny = 60;
    double ineq_tol = 1e-6;
    auto* vgrid = value_cmd->add_subcommand("grid", "value on the probe box");
    auto* vcheck = value_cmd->add_subcommand("check", "residual summary");
    std::string vgrid_out = "value.csv";
    for (auto* sub : {vgrid, vcheck}) {
        add_config(sub, true);
        bflags.add(sub);
        sub->add_option("--m-n", m_n, "grid cells on the half diagonal for the option value (0: same as --n)");
        sub->add_option("--nx", probe_nx, "price probes per interval")->check(CLI::Range(2, 100000));
        sub->add_option("--ny", probe_ny, "cells per side of the capacity probe grid")->check(CLI::Range(1, 10000));
    }
    vgrid->add_option("--out", vgrid_out, "CSV path");
    vcheck->add_option("--ineq-tol", ineq_tol, "tolerance of the installation inequality probe");

    // simulate / nash-check
    detail::SimFlags sflags;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo payoff under the equilibrium strategy");
    add_config(sim_cmd, true);
    bflags.add(sim_cmd);
    sflags.add(sim_cmd);
    std::string sim_out, traj_out;
    sim_cmd->add_option("--out", sim_out, "per-path summary CSV");
    sim_cmd->add_option("--trajectory", traj_out, "CSV with the trajectory of path 0");
    auto* nash_cmd = app.add_subcommand("nash-check", "paired payoff differences of unilateral deviations");
    add_config(nash_cmd, true);
    bflags.add(nash_cmd);
    sflags.add(nash_cmd);
    std::vector<std::string> deviation_text;
    int nash_player = 1;
    std::string nash_out;
    nash_cmd->add_option("--deviation", deviation_text, "shift:<d>, lump:<l> or never (repeatable)");
    nash_cmd->add_option("--player", nash_player, "deviating player")->check(CLI::IsMember({1, 2}));
    nash_cmd->add_option("--out", nash_out, "CSV with the paired-difference table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        auto params = [&]() { return load_params(config); };
        out << std::setprecision(12);

        if (psi_cmd->parsed()) {
            bool any_param_flag = false;
            for (const char* name : {"--k", "--mu", "--sigma", "--beta", "--rho", "--c", "--theta"})
                any_param_flag = any_param_flag || psi_cmd->count(name) > 0;
            if (config.empty() && !any_param_flag) {
                err << "error: psi needs --config or explicit parameter flags\n" << psi_cmd->help();
                return 2;
            }
            const ModelParams p = config.empty() ? validate(flag_params) : params();
            const PsiEvaluator psi(p, psi_tol);
            const PsiValues v = psi.eval(psi_x);
            const double value = psi.psi(psi_x, psi_order);
            if (as_json) {
                out << nlohmann::json{{"x", psi_x}, {"order", psi_order}, {"value", value}, {"rel_error", v.rel_error}}.dump()
                    << "\n";
            } else {
                out << "psi^(" << psi_order << ")(" << fmt(psi_x) << ") = " << fmt(value) << "\n";
                out << "estimated relative error = " << fmt(v.rel_error) << "\n";
            }
            return 0;
        }

        if (static_cmd->parsed()) {
            const ModelParams p = params();
            if (grid_n > 0) {
                CsvWriter csv(static_out, p, {"x", "y1", "y2", "region", "i1", "i2", "v1", "v2"},
                              "grid=" + std::to_string(grid_n));
                const double xlo = statics::a_inverse(p, 0.0), xhi = statics::a_inverse(p, 1.5 * p.theta);
                for (int k = 0; k < grid_n; ++k)
                    for (int i = 0; i < grid_n; ++i)
                        for (int j = 0; i + j < grid_n; ++j) {
                            const double x = xlo + (xhi - xlo) * k / (grid_n - 1);
                            const statics::StaticState s{x, {p.theta * i / (grid_n - 1), p.theta * j / (grid_n - 1)}};
                            const auto eq = statics::static_equilibrium(p, s);
                            csv.row({fmt(x), fmt(s.y.y1), fmt(s.y.y2), detail::region_name(statics::static_region(p, s)),
                                     fmt(eq.i1), fmt(eq.i2), fmt(statics::static_value(p, s, Player::One)),
                                     fmt(statics::static_value(p, s, Player::Two))});
                        }
                out << "wrote " << static_out << "\n";
                return 0;
            }
            if (!sx || !sy1 || !sy2) {
                err << "error: static-game needs --x, --y1 and --y2 (or --grid)\n" << static_cmd->help();
                return 2;
            }
            const statics::StaticState s{*sx, check_simplex({*sy1, *sy2}, p.theta)};
            const auto reg = statics::static_region(p, s);
            const auto eq = statics::static_equilibrium(p, s);
            const double v1 = statics::static_value(p, s, Player::One), v2 = statics::static_value(p, s, Player::Two);
            const double pareto = statics::pareto_install(p, s);
            if (as_json) {
                out << nlohmann::json{{"region", statics::to_string(reg.label)},
                                      {"player1", statics::to_string(reg.player1)},
                                      {"player2", statics::to_string(reg.player2)},
                                      {"saturating", reg.saturating},
                                      {"i1", eq.i1},
                                      {"i2", eq.i2},
                                      {"v1", v1},
                                      {"v2", v2},
                                      {"pareto_total_install", pareto}}
                           .dump()
                    << "\n";
            } else {
                out << "region: " << statics::to_string(reg.label) << " (player 1 " << statics::to_string(reg.player1)
                    << ", player 2 " << statics::to_string(reg.player2) << (reg.saturating ? ", saturating" : "")
                    << ")\n";
                out << "equilibrium installation: i1 = " << fmt(eq.i1) << ", i2 = " << fmt(eq.i2) << "\n";
                out << "capacity after installation: y1 = " << fmt(s.y.y1 + eq.i1) << ", y2 = " << fmt(s.y.y2 + eq.i2)
                    << "\n";
                out << "values: v1 = " << fmt(v1) << ", v2 = " << fmt(v2) << "\n";
                out << "planner total installation: " << fmt(pareto) << "\n";
            }
            return 0;
        }

        if (bsolve->parsed()) {
            const ModelParams p = params();
            const PsiEvaluator psi(p);
            const BoundaryOptions o = bflags.options();
            const BoundaryCurve F = solve_boundary(psi, o);
            {
                CsvWriter csv(bsolve_out, p, {"s", "F", "Ftilde"}, bflags.describe());
                const auto& t = F.table();
                for (std::size_t i = 0; i < t.s.size(); ++i) csv.row({t.s[i], t.f[i], t.ftilde[i]});
            }
            const std::vector<SideAnchor> anchors = solve_side_anchors(psi, o.side_anchors);
            {
                CsvWriter csv(detail::side_path(bsolve_out), p, {"y1", "y2", "Ftilde", "F", "u_rel"}, bflags.describe());
                for (const auto& a : anchors) {
                    const SimplexPoint y{a.s, p.theta - a.s};
                    csv.row({a.s, y.y2, a.ftilde, a.f, solve_side_ab(psi, y).u_rel});
                }
            }
            const SideRoot quarter = solve_side_ab(psi, {p.theta / 4, 3 * p.theta / 4});
            const AdmissibilityReport rep = check_admissibility(F);
            const double fc = F.diag(p.theta / 2);
            if (as_json) {
                out << nlohmann::json{{"F_C", fc},
                                      {"Ftilde_C", F.diag_ftilde(p.theta / 2)},
                                      {"F_O", F.diag(0)},
                                      {"side_root_quarter", quarter.ftilde},
                                      {"gap_at_C", endpoint_gap_at_c(psi)},
                                      {"admissible", rep.ok},
                                      {"first_violation", rep.first_violation}}
                           .dump()
                    << "\n";
            } else {
                out << "F(O) = " << fmt(F.diag(0)) << "\n";
                out << "F(C) = " << fmt(fc) << ", Ftilde(C) = " << fmt(F.diag_ftilde(p.theta / 2)) << "\n";
                out << "cap-face root at (theta/4, 3theta/4): Ftilde = " << fmt(quarter.ftilde) << "\n";
                out << "cap-face root at C minus Ftilde(C): " << fmt(endpoint_gap_at_c(psi)) << "\n";
                out << "admissible: " << (rep.ok ? "yes" : "no");
                if (!rep.ok) out << " (" << rep.first_violation << ")";
                out << "\nwrote " << bsolve_out << " and " << detail::side_path(bsolve_out) << "\n";
            }
            return 0;
        }

        if (bm->parsed()) {
            const ModelParams p = params();
            const PsiEvaluator psi(p);
            const BoundaryCurve F = solve_boundary(psi, bflags.options());
            const int n = m_n > 0 ? m_n : bflags.n;
            const MGrid g = solve_m(psi, F, n);
            CsvWriter csv(bm_out, p,
                          {"y1", "y2", "m1", "dm1dy1_upper", "dm1dy2_upper", "dm1dy1_lower", "dm1dy2_lower"},
                          bflags.describe() + " m_n=" + std::to_string(n));
            const double h = g.h();
            for (int i = 0; i <= 2 * n; ++i)
                for (int j = 0; i + j <= 2 * n; ++j)
                    csv.row({fmt(i * h), fmt(j * h), fmt(g.at(i, j)), detail::nan_or(g.up_d1(i, j)),
                             detail::nan_or(g.up_d2(i, j)), detail::nan_or(g.lo_d1(i, j)),
                             detail::nan_or(g.lo_d2(i, j))});
            out << "wrote " << bm_out << "\n";
            return 0;
        }

        if (vgrid->parsed() || vcheck->parsed()) {
            const ModelParams p = params();
            const PsiEvaluator psi(p);
            const ValueField V = build_value_field(psi, bflags.options(), m_n);
            const ProbeBox box = default_probe_box(V.boundary(), probe_nx, probe_ny);
            if (vgrid->parsed()) {
                CsvWriter csv(vgrid_out, p,
                              {"x", "y1", "y2", "region", "V1", "V2", "dV1dy1", "dV1dy2", "pde_residual"},
                              bflags.describe());
                for (const SimplexPoint& y : box.ys)
                    for (double x : box.xs) {
                        const RegionLabel4 r = V.classify(x, y);
                        const LocalValue l = V.evaluate(x, y);
                        const double res = r.label == Region4::W1W2 ? V.residual_pde(x, y) : NAN;
                        csv.row({fmt(x), fmt(y.y1), fmt(y.y2), to_string(r.label), fmt(l.v),
                                 fmt(V.value(x, y, Player::Two)), fmt(l.dy1), fmt(l.dy2), detail::nan_or(res)});
                    }
                out << "wrote " << vgrid_out << "\n";
                return 0;
            }
            const ValueDiagnostics d = diagnose(V, box, ineq_tol);
            const InterfaceJumps jumps = interface_jumps(V);
            const double cond_c = V.diagonal_condition_at_c();
            const double remark = remark_inconsistency_check(psi);
            if (as_json) {
                nlohmann::json regions = nlohmann::json::object();
                for (const auto& [r, st] : d.regions)
                    regions[to_string(r)] = {{"count", st.count},
                                             {"max_abs_residual", st.max_abs_residual},
                                             {"mean_abs_residual", st.count ? st.sum_abs_residual / st.count : 0.0}};
                out << nlohmann::json{{"regions", regions},
                                      {"max_pde_residual_scaled", d.max_pde_scaled},
                                      {"growth_K", d.growth_K},
                                      {"lipschitz_L", d.lipschitz_L},
                                      {"max_smooth_fit", d.max_smooth_fit},
                                      {"diagonal_condition_at_C", cond_c},
                                      {"min_m_y2_above_half", d.min_m_upper_cap},
                                      {"below_R1_count", d.below_r1},
                                      {"inequality_violations", d.ineq_violations},
                                      {"worst_inequality", d.worst_ineq},
                                      {"jump_own_boundary", jumps.across_own},
                                      {"jump_other_boundary", jumps.across_other},
                                      {"jump_joint_boundary", jumps.across_joint},
                                      {"dxx_jump_own_boundary", jumps.dxx_jump_own},
                                      {"cap_face_limit", remark}}
                           .dump()
                    << "\n";
                return 0;
            }
            out << std::left << std::setw(8) << "region" << std::setw(10) << "count" << std::setw(22) << "max|res|"
                << "mean|res|\n";
            for (const auto& [r, st] : d.regions)
                out << std::setw(8) << to_string(r) << std::setw(10) << st.count << std::setw(22)
                    << fmt(st.max_abs_residual) << fmt(st.count ? st.sum_abs_residual / double(st.count) : 0.0) << "\n";
            out << std::right;
            out << "PDE residual / (1+|x|), interior joint waiting: " << fmt(d.max_pde_scaled) << "\n";
            out << "smooth-fit residual at nodes: " << fmt(d.max_smooth_fit) << "\n";
            out << "diagonal condition at C: " << fmt(cond_c) << "\n";
            out << "growth constant K: " << fmt(d.growth_K) << "\n";
            out << "Lipschitz constant L of dV/dx: " << fmt(d.lipschitz_L) << "\n";
            out << "min m1 on y2 >= theta/2: " << fmt(d.min_m_upper_cap) << "\n";
            out << "probes with y2 >= theta/2 and V1 < R1: " << d.below_r1 << "\n";
            out << "inequality dV1/dy1 <= c violations: " << d.ineq_violations;
            if (d.worst_ineq > ineq_tol)
                out << " (worst " << fmt(d.worst_ineq) << " at x = " << fmt(d.worst_ineq_x) << ", y = ("
                    << fmt(d.worst_ineq_y.y1) << ", " << fmt(d.worst_ineq_y.y2) << "))";
            out << "\n";
            out << "jumps of V1 across own / other / joint boundary: " << fmt(jumps.across_own) << " / "
                << fmt(jumps.across_other) << " / " << fmt(jumps.across_joint) << "\n";
            out << "jump of d2V1/dx2 across own boundary: " << fmt(jumps.dxx_jump_own) << "\n";
            out << "cap-face limit of dV1/dy1 - c at (theta/4, 3theta/4): " << fmt(remark) << "\n";
            return 0;
        }

        if (sim_cmd->parsed()) {
            const ModelParams p = params();
            const PsiEvaluator psi(p);
            const ValueField V = build_value_field(psi, bflags.options());
            const SimplexPoint y0 = check_simplex({sflags.y1, sflags.y2}, p.theta);
            const SimConfig cfg = resolve(p, sflags.config());
            const std::vector<Arm> arms{{"equilibrium", Policy::equilibrium(), Policy::equilibrium()}};
            const std::vector<ArmResult> res = simulate_arms(sflags.x0, y0, V.boundary(), cfg, arms);
            const ArmResult& r = res[0];
            const PayoffEstimate e1 = estimate(r, Player::One, p, cfg), e2 = estimate(r, Player::Two, p, cfg);
            const double v1 = V.value(sflags.x0, y0, Player::One), v2 = V.value(sflags.x0, y0, Player::Two);
            double inc = 0;
            for (double m : r.max_increment) inc += m;
            inc /= double(r.max_increment.size());
            if (!sim_out.empty()) {
                CsvWriter csv(sim_out, p, {"path", "payoff1", "payoff2", "x_T", "y1_T", "y2_T", "max_increment"},
                              sflags.describe(p) + " " + bflags.describe());
                for (std::size_t i = 0; i < cfg.n_paths; ++i)
                    csv.row({fmt(double(i)), fmt(r.payoff1[i]), fmt(r.payoff2[i]), fmt(r.terminal_x[i]),
                             fmt(r.terminal_y1[i]), fmt(r.terminal_y2[i]), fmt(r.max_increment[i])});
            }
            if (!traj_out.empty()) {
                const SimPath path = simulate_equilibrium(sflags.x0, y0, V.boundary(), cfg, 0);
                CsvWriter csv(traj_out, p, {"t", "x", "y1", "y2", "i1", "i2"}, sflags.describe(p));
                for (std::size_t i = 0; i < path.times.size(); ++i)
                    csv.row({path.times[i], path.x[i], path.y1[i], path.y2[i], path.i1[i], path.i2[i]});
            }
            if (as_json) {
                out << nlohmann::json{{"payoff1", {{"mean", e1.mean}, {"std_error", e1.std_error}}},
                                      {"payoff2", {{"mean", e2.mean}, {"std_error", e2.std_error}}},
                                      {"V1", v1},
                                      {"V2", v2},
                                      {"truncation_bias_bound", e1.truncation_bias_bound},
                                      {"discretization_allowance", discretization_allowance(p, cfg.dt)},
                                      {"max_boundary_excess", r.max_boundary_excess},
                                      {"max_simplex_excess", r.max_simplex_excess},
                                      {"monotonicity_violations", r.monotonicity_violations},
                                      {"mean_max_increment", inc}}
                           .dump()
                    << "\n";
                return 0;
            }
            out << "region at start: " << to_string(V.classify(sflags.x0, y0).label) << "\n";
            out << "player 1: payoff " << fmt(e1.mean) << " +- " << fmt(e1.std_error) << ", value " << fmt(v1) << "\n";
            out << "player 2: payoff " << fmt(e2.mean) << " +- " << fmt(e2.std_error) << ", value " << fmt(v2) << "\n";
            out << "truncation bias bound: " << fmt(e1.truncation_bias_bound)
                << ", discretization allowance: " << fmt(discretization_allowance(p, cfg.dt)) << "\n";
            out << "max X - boundary after t=0: " << fmt(r.max_boundary_excess)
                << ", max Y1+Y2-theta: " << fmt(r.max_simplex_excess)
                << ", monotonicity violations: " << r.monotonicity_violations << "\n";
            out << "mean of per-path largest increment after t=0: " << fmt(inc) << "\n";
            return 0;
        }

        if (nash_cmd->parsed()) {
            const ModelParams p = params();
            const PsiEvaluator psi(p);
            const ValueField V = build_value_field(psi, bflags.options());
            const SimplexPoint y0 = check_simplex({sflags.y1, sflags.y2}, p.theta);
            std::vector<Deviation> devs;
            for (const auto& t : deviation_text) devs.push_back(parse_deviation(t));
            if (devs.empty()) devs = default_deviations();
            const SimConfig cfg = resolve(p, sflags.config());
            const Player who = nash_player == 1 ? Player::One : Player::Two;
            const NashReport rep = nash_test(sflags.x0, y0, V.boundary(), cfg, devs, who);
            const double v = V.value(sflags.x0, y0, who);
            const double allowance = discretization_allowance(p, cfg.dt);
            const bool value_ok = std::abs(rep.equilibrium.mean - v) <= 3 * rep.equilibrium.std_error + allowance;
            if (!nash_out.empty()) {
                CsvWriter csv(nash_out, p, {"arm", "payoff", "std_error", "diff", "diff_std_error", "not_profitable"},
                              sflags.describe(p) + " player=" + std::to_string(nash_player) + " " + bflags.describe());
                csv.row({"equilibrium", fmt(rep.equilibrium.mean), fmt(rep.equilibrium.std_error), "0", "0", "1"});
                for (const auto& d : rep.deviations)
                    csv.row({d.name, fmt(d.payoff.mean), fmt(d.payoff.std_error), fmt(d.diff_mean), fmt(d.diff_se),
                             d.not_profitable ? "1" : "0"});
            }
            if (as_json) {
                nlohmann::json arms = nlohmann::json::array();
                for (const auto& d : rep.deviations)
                    arms.push_back({{"arm", d.name},
                                    {"payoff", d.payoff.mean},
                                    {"std_error", d.payoff.std_error},
                                    {"diff", d.diff_mean},
                                    {"diff_std_error", d.diff_se},
                                    {"not_profitable", d.not_profitable}});
                out << nlohmann::json{{"player", nash_player},
                                      {"equilibrium", {{"mean", rep.equilibrium.mean}, {"std_error", rep.equilibrium.std_error}}},
                                      {"value", v},
                                      {"allowance", allowance},
                                      {"value_match", value_ok},
                                      {"deviations", arms}}
                           .dump()
                    << "\n";
                return 0;
            }
            out << "player " << nash_player << ", region at start " << to_string(V.classify(sflags.x0, y0).label)
                << "\n";
            out << "equilibrium payoff " << fmt(rep.equilibrium.mean) << " +- " << fmt(rep.equilibrium.std_error)
                << ", value " << fmt(v) << ", allowance " << fmt(allowance) << (value_ok ? " [match]" : " [MISMATCH]")
                << "\n";
            out << std::left << std::setw(14) << "arm" << std::setw(22) << "payoff" << std::setw(22) << "diff"
                << std::setw(22) << "diff_se" << "verdict\n";
            for (const auto& d : rep.deviations)
                out << std::setw(14) << d.name << std::setw(22) << fmt(d.payoff.mean) << std::setw(22) << fmt(d.diff_mean)
                    << std::setw(22) << fmt(d.diff_se) << (d.not_profitable ? "not profitable" : "PROFITABLE") << "\n";
            out << std::right;
            return 0;
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace capgame::cli
