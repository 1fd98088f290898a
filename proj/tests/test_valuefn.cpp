#include <gtest/gtest.h>

#include <cmath>

#include <capgame/valuefn.hpp>

using namespace capgame;

namespace {

const ModelParams P = reference_params();

const PsiEvaluator& psi() {
    static const PsiEvaluator e(P);
    return e;
}

const ValueField& field() {
    static const ValueField V = build_value_field(psi());
    return V;
}

const ValueDiagnostics& diagnostics() {
    static const ValueDiagnostics d = diagnose(field(), default_probe_box(field().boundary()));
    return d;
}

}  // namespace

TEST(Classify, Examples) {
    const ValueField& V = field();
    const BoundaryCurve& F = V.boundary();
    EXPECT_EQ(V.classify(F.diag(0) - 1, {0, 0}).label, Region4::W1W2);
    EXPECT_EQ(V.classify(10.0, {0, 0}).label, Region4::I1I2);
    for (double x : {-2.0, 0.5, 1.3, 5.0}) {
        EXPECT_EQ(V.classify(x, {0.6, 0.3}).player1, Membership::Saturated);
        EXPECT_EQ(V.classify(x, {0.3, 0.6}).player2, Membership::Saturated);
    }
    EXPECT_EQ(V.classify(F.diag(0.3) - 0.01, {0.3, 0.1}).player1, Membership::Prolonged);
    EXPECT_EQ(V.classify(F.upper({0.1, 0.3}) - 1e-6, {0.1, 0.3}).player1, Membership::Free);
    EXPECT_EQ(V.classify(F.upper({0.1, 0.3}) + 1e-6, {0.1, 0.3}).label, Region4::I1W2);
    EXPECT_EQ(V.classify(F.lower({0.3, 0.1}) + 1e-6, {0.3, 0.1}).label, Region4::W1I2);
    EXPECT_EQ(to_string(Region4::I1W2), "I1W2");
}

TEST(Value, JointWaitingIsOptionPlusProfit) {
    const ValueField& V = field();
    for (SimplexPoint y : {SimplexPoint{0, 0}, SimplexPoint{0.1, 0.3}, SimplexPoint{0.4, 0.2}, SimplexPoint{0.2, 0.75}})
        for (double x : {-1.0, 0.5, 1.0}) {
            ASSERT_EQ(V.classify(x, y).label, Region4::W1W2);
            const double expect = V.mgrid().value(y) * psi().psi(x + P.beta * y.total()) + r_i(P, x, y, Player::One);
            EXPECT_NEAR(V.value(x, y), expect, 1e-14 * (1 + std::abs(expect)));
        }
}

TEST(Value, EqualsProfitOnCapFace) {
    const ValueField& V = field();
    for (double s = 0; s <= P.theta; s += 0.05)
        for (double x : {-1.0, 0.7, 1.5, 3.0}) {
            const SimplexPoint y{s, P.theta - s};
            EXPECT_NEAR(V.value(x, y), r_i(P, x, y, Player::One), 1e-12) << s << " " << x;
        }
}

TEST(Value, JointInstallationJumpsToDiagonalTarget) {
    const ValueField& V = field();
    const BoundaryCurve& F = V.boundary();
    const double x = F.diag(0.3);
    const SimplexPoint y{0.05, 0.1};
    ASSERT_EQ(V.classify(x, y).label, Region4::I1I2);
    const SimplexPoint t = V.target(x, y);
    EXPECT_NEAR(t.y1, 0.3, 1e-10);
    EXPECT_NEAR(t.y2, 0.3, 1e-10);
    EXPECT_NEAR(V.value(x, y), V.local(x, t).v - P.c * (t.y1 - y.y1), 1e-14);
}

TEST(Value, ReflectionIdentity) {
    const ValueField& V = field();
    for (double x : {0.3, 1.2, 1.4, 2.5})
        for (double u = 0; u <= 1; u += 0.1)
            for (double v = 0; u + v <= 1; v += 0.1)
                EXPECT_EQ(V.value(x, {u, v}, Player::Two), V.value(x, {v, u}, Player::One));
}

TEST(Value, ContinuousAcrossInterfaces) {
    const InterfaceJumps fine = interface_jumps(field());
    EXPECT_LE(fine.across_own, 1e-3);
    EXPECT_LE(fine.across_other, 1e-3);
    EXPECT_LE(fine.across_joint, 1e-3);
    const ValueField coarse = build_value_field(psi(), {}, 100);
    const InterfaceJumps c = interface_jumps(coarse);
    EXPECT_LE(c.across_own, 1e-3);
    EXPECT_LE(c.across_other, 1e-3);
    EXPECT_LE(c.across_joint, 1e-3);
    RecordProperty("dxx_jump_own", std::to_string(fine.dxx_jump_own));
}

TEST(Value, FlatInOpponentLevelWhileOpponentInstalls) {
    const ValueField& V = field();
    const double h = 1e-4 * P.theta;
    int checked = 0;
    for (double y1 = 0.05; y1 < 0.5; y1 += 0.05)
        for (double y2 = 0.0; y2 < y1; y2 += 0.02)
            for (double dx : {0.01, 0.05, 0.2}) {
                const SimplexPoint y{y1, y2};
                const double x = V.boundary().lower(y) + dx;
                if (V.classify(x, y).label != Region4::W1I2) continue;
                if (V.classify(x, {y1, y2 + h}).label != Region4::W1I2) continue;
                if (y2 - h >= 0 && V.classify(x, {y1, y2 - h}).label != Region4::W1I2) continue;
                const double lo = y2 - h >= 0 ? y2 - h : y2;
                const double fd = (V.value(x, {y1, y2 + h}) - V.value(x, {y1, lo})) / (y2 + h - lo);
                EXPECT_LE(std::abs(fd), 1e-4) << x << " " << y1 << " " << y2;
                ++checked;
            }
    EXPECT_GT(checked, 20);
}

TEST(Residuals, PdeOnJointWaitingInterior) {
    const ValueDiagnostics& d = diagnostics();
    EXPECT_LE(d.max_pde_scaled, 1e-6);
    EXPECT_GT(d.regions.at(Region4::W1W2).count, 1000u);
}

TEST(Residuals, ProfitIsParticularSolution) {
    for (SimplexPoint y : {SimplexPoint{0.2, 0.3}, SimplexPoint{0.7, 0.1}})
        for (double x : {-2.0, 0.4, 3.0}) {
            const double r = P.k * (P.mu - P.beta * y.total() - x) * r_i_dx(P, y, Player::One) -
                             P.rho * r_i(P, x, y, Player::One) + x * y.y1;
            EXPECT_NEAR(r, 0.0, 1e-13);
        }
}

TEST(Residuals, SmoothFitAndDiagonalCondition) {
    EXPECT_LE(diagnostics().max_smooth_fit, 1e-4);
    EXPECT_LE(std::abs(field().diagonal_condition_at_c()), 1e-4);
    const auto [r1, r2] = field().residual_smooth_fit({0.1, 0.3});
    EXPECT_TRUE(std::isfinite(r1));
    EXPECT_TRUE(std::isnan(r2));
}

TEST(Residuals, GrowthAndLipschitzAreFinite) {
    const ValueDiagnostics& d = diagnostics();
    EXPECT_TRUE(std::isfinite(d.growth_K));
    EXPECT_TRUE(std::isfinite(d.lipschitz_L));
    EXPECT_GT(d.growth_K, 0);
    RecordProperty("growth_K", std::to_string(d.growth_K));
    RecordProperty("lipschitz_L", std::to_string(d.lipschitz_L));
    RecordProperty("ineq_violations", std::to_string(d.ineq_violations));
    RecordProperty("below_r1", std::to_string(d.below_r1));
    RecordProperty("min_m_upper_cap", std::to_string(d.min_m_upper_cap));
}

TEST(Residuals, InequalityProbeReportsLocation) {
    const ValueDiagnostics& d = diagnostics();
    EXPECT_TRUE(std::isfinite(d.worst_ineq));
    EXPECT_TRUE(in_simplex(d.worst_ineq_y, P.theta));
    EXPECT_EQ(field().classify(d.worst_ineq_x, d.worst_ineq_y).label, Region4::W1W2);
}

TEST(Remark, CapFaceLimit) {
    const double v = remark_inconsistency_check(psi());
    EXPECT_NEAR(v, 2.45970186592 / 2 + 0.25 - 1, 1e-9);
    EXPECT_NEAR(v, 0.47985, 1e-4);
    EXPECT_GT(v, 0.4);
    const double diag_mode = remark_inconsistency_check(psi(), true);
    EXPECT_NEAR(diag_mode, 0.25, 1e-12);
    EXPECT_LT(diag_mode, v);  // affine and increasing in the evaluation price
}
