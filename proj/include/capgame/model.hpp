#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace capgame {

/// Slack on y1 + y2 <= theta for states pushed exactly onto a face.
inline constexpr double kGeomEps = 1e-12;

enum class Player { One = 1, Two = 2 };

constexpr Player other(Player p) { return p == Player::One ? Player::Two : Player::One; }

/// Market constants. Price follows dX = k(mu - beta*(Y1+Y2) - X)dt + sigma dW,
/// profits are discounted at rho, capacity costs c per unit, total capacity is theta.
struct ModelParams {
    double k = 1.0;
    double mu = 1.0;
    double sigma = 1.0;
    double beta = 0.5;
    double rho = 1.0;
    double c = 1.0;
    double theta = 1.0;

    bool operator==(const ModelParams&) const = default;
};

/// Reference parameter set k = c = rho = mu = theta = sigma = 1, beta = 1/2.
inline ModelParams reference_params() { return ModelParams{}; }

inline ModelParams validate(const ModelParams& p) {
    auto need = [](bool ok, const char* msg) {
        if (!ok) throw ParameterError(msg);
    };
    need(std::isfinite(p.k) && std::isfinite(p.mu) && std::isfinite(p.sigma) &&
             std::isfinite(p.beta) && std::isfinite(p.rho) && std::isfinite(p.c) &&
             std::isfinite(p.theta),
         "parameters must be finite");
    need(p.k > 0, "k must be positive");
    need(p.sigma > 0, "sigma must be positive");
    need(p.beta > 0, "beta must be positive");
    need(p.rho > 0, "rho must be positive");
    need(p.theta > 0, "theta must be positive");
    need(p.c >= 0, "c must be non-negative");
    return p;
}

/// Installed capacities (y1, y2) in the closed simplex of size theta.
struct SimplexPoint {
    double y1 = 0.0;
    double y2 = 0.0;

    double total() const { return y1 + y2; }
    double own(Player p) const { return p == Player::One ? y1 : y2; }
    double opp(Player p) const { return p == Player::One ? y2 : y1; }
    bool operator==(const SimplexPoint&) const = default;
};

constexpr SimplexPoint reflect(SimplexPoint p) { return {p.y2, p.y1}; }

inline bool in_simplex(SimplexPoint p, double theta, double eps = kGeomEps) {
    return p.y1 >= -eps && p.y2 >= -eps && p.y1 + p.y2 <= theta + eps;
}

inline SimplexPoint check_simplex(SimplexPoint p, double theta) {
    if (!in_simplex(p, theta))
        throw ParameterError("capacities (" + std::to_string(p.y1) + ", " + std::to_string(p.y2) +
                             ") outside the simplex");
    return p;
}

/// Named corners of the simplex.
inline SimplexPoint corner_O(const ModelParams&) { return {0.0, 0.0}; }
inline SimplexPoint corner_A(const ModelParams& p) { return {p.theta, 0.0}; }
inline SimplexPoint corner_B(const ModelParams& p) { return {0.0, p.theta}; }
inline SimplexPoint corner_C(const ModelParams& p) { return {p.theta / 2, p.theta / 2}; }

/// Expected discounted profit of player i when nobody installs again.
inline double r_i(const ModelParams& p, double x, SimplexPoint y, Player i) {
    return y.own(i) * (x * p.rho + p.mu * p.k - p.beta * p.k * y.total()) /
           (p.rho * (p.rho + p.k));
}

/// x-derivative of r_i (independent of x).
inline double r_i_dx(const ModelParams& p, SimplexPoint y, Player i) {
    return y.own(i) / (p.rho + p.k);
}

/// Shifted marginal profit of player 1, evaluated in the shifted price z = x + beta*(y1+y2):
/// equals d r_1 / d y1 at the unshifted price.
inline double r_tilde_1(const ModelParams& p, double z, SimplexPoint y) {
    return z / (p.rho + p.k) +
           (p.mu * p.k - p.beta * (p.rho + p.k) * y.total() - p.beta * p.k * y.y1) /
               (p.rho * (p.rho + p.k));
}

}  // namespace capgame
