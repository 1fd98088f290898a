#include <gtest/gtest.h>

#include <capgame/errors.hpp>
#include <capgame/model.hpp>

using namespace capgame;

TEST(Params, ReferenceSetAccepted) {
    const ModelParams p = validate(reference_params());
    EXPECT_EQ(p.k, 1.0);
    EXPECT_EQ(p.beta, 0.5);
    EXPECT_EQ(p, reference_params());
}

TEST(Params, RejectsEachNonPositiveField) {
    auto expect_reject = [](ModelParams p, const std::string& field) {
        try {
            validate(p);
            FAIL() << field << " accepted";
        } catch (const ParameterError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    ModelParams p = reference_params();
    p.sigma = 0;
    expect_reject(p, "sigma");
    p = reference_params();
    p.k = -1;
    expect_reject(p, "k");
    p = reference_params();
    p.beta = 0;
    expect_reject(p, "beta");
    p = reference_params();
    p.rho = 0;
    expect_reject(p, "rho");
    p = reference_params();
    p.theta = -0.5;
    expect_reject(p, "theta");
    p = reference_params();
    p.c = -1e-9;
    expect_reject(p, "c");
}

TEST(Params, SigmaMessage) {
    ModelParams p = reference_params();
    p.sigma = 0;
    try {
        validate(p);
        FAIL();
    } catch (const ParameterError& e) {
        EXPECT_STREQ(e.what(), "sigma must be positive");
    }
}

TEST(Params, ZeroCostAccepted) {
    ModelParams p = reference_params();
    p.c = 0;
    EXPECT_NO_THROW(validate(p));
}

TEST(Simplex, ReflectSwapsAndIsInvolution) {
    const SimplexPoint a = reflect({0.2, 0.7});
    EXPECT_EQ(a.y1, 0.7);
    EXPECT_EQ(a.y2, 0.2);
    const SimplexPoint c = reflect({0.5, 0.5});
    EXPECT_EQ(c.y1, 0.5);
    EXPECT_EQ(c.y2, 0.5);
    for (double u = 0; u <= 1; u += 0.1)
        for (double v = 0; u + v <= 1; v += 0.1) {
            const SimplexPoint b = reflect(reflect({u, v}));
            EXPECT_EQ(b.y1, u);
            EXPECT_EQ(b.y2, v);
        }
}

TEST(Simplex, MembershipTolerance) {
    EXPECT_TRUE(in_simplex({0.5, 0.5 + 5e-13}, 1.0));
    EXPECT_FALSE(in_simplex({0.5, 0.5 + 1e-9}, 1.0));
    EXPECT_FALSE(in_simplex({-1e-9, 0.5}, 1.0));
    EXPECT_THROW(check_simplex({0.7, 0.7}, 1.0), ParameterError);
}

TEST(Simplex, Corners) {
    const ModelParams p = reference_params();
    EXPECT_EQ(corner_A(p).y1, 1.0);
    EXPECT_EQ(corner_B(p).y2, 1.0);
    EXPECT_EQ(corner_C(p).y1, 0.5);
    EXPECT_EQ(corner_C(p).y2, 0.5);
}

TEST(Profit, NoInstallationValue) {
    const ModelParams p = reference_params();
    // 0.5 (1 + 1 - 0.5) / 2
    EXPECT_DOUBLE_EQ(r_i(p, 1.0, {0.5, 0.5}, Player::One), 0.375);
    EXPECT_EQ(r_i(p, 3.0, {0.0, 0.4}, Player::One), 0.0);
    for (double x : {-1.0, 0.3, 2.0})
        for (double u = 0; u <= 1; u += 0.125)
            for (double v = 0; u + v <= 1; v += 0.125)
                EXPECT_EQ(r_i(p, x, {u, v}, Player::One), r_i(p, x, reflect({u, v}), Player::Two));
}

TEST(Profit, RTildeIsShiftedPriceDerivative) {
    const ModelParams p{1.3, 0.7, 0.9, 0.4, 0.8, 0.6, 1.5};
    for (double x : {-0.5, 0.4, 1.7})
        for (SimplexPoint y : {SimplexPoint{0.1, 0.3}, SimplexPoint{0.5, 0.2}, SimplexPoint{0.0, 1.4}}) {
            const double h = 1e-6;
            const double fd = (r_i(p, x, {y.y1 + h, y.y2}, Player::One) - r_i(p, x, {y.y1 - h, y.y2}, Player::One)) / (2 * h);
            EXPECT_NEAR(r_tilde_1(p, x + p.beta * y.total(), y), fd, 1e-8);
        }
}
