#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/error_analysis.hpp"

using namespace smelab;
using namespace smelab::analysis;
using risk::QuadraticObjective;
using sme::SmeKind;

namespace {

VectorXd v1(double x) { return VectorXd::Constant(1, x); }

QuadraticObjective scalar_q(double kappa, double ts) { return {MatrixXd::Constant(1, 1, kappa), v1(ts)}; }

// Scalar settings with theta* = -1, theta0 = 0 unless stated.
LinearErrorReport scalar_report(double kappa, double T, double batch, double beq, double theta0 = 0.0) {
    return linear_error_terms(scalar_q(kappa, -1.0), v1(theta0), T, batch, beq, 1.0);
}

QuadraticObjective random_q(Rng& rng, int d) {
    std::normal_distribution<double> n01;
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n01(rng);
    VectorXd ts(d);
    for (int i = 0; i < d; ++i) ts(i) = n01(rng);
    return {a * a.transpose() / d + 0.2 * MatrixXd::Identity(d, d), ts};
}

}  // namespace

TEST(LinearErrorTerms, TableValues) {
    const auto s2 = scalar_report(1.0, 0.5, 1, 1.0);
    EXPECT_NEAR(*s2.b_gf, 2.85914, 5e-6);
    EXPECT_NEAR(s2.le_ncc, -0.25 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(s2.le_ncc, -0.0919699, 5e-8);
    EXPECT_NEAR(*scalar_report(10.0, 0.5, 1, 4.0).b_gf, 118.127, 5e-4);
}

TEST(LinearErrorTerms, TypeInvariants) {
    Rng rng = StreamKey(1).rng();
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int r = 0; r < 100; ++r) {
        const auto q = random_q(rng, 3);
        const VectorXd th0 = q.theta_star() + VectorXd::Constant(3, u(rng) - 2.5);
        const double batch = std::floor(u(rng) * 4) + 1;
        const auto rep = linear_error_terms(q, th0, u(rng), batch, u(rng), u(rng));
        EXPECT_EQ(rep.le_ncc, -rep.a);
        EXPECT_NEAR(rep.le_cc, -rep.a + rep.b / batch, 1e-15 * (1 + std::abs(rep.b)));
        EXPECT_NEAR(rep.le_gf, -rep.a + rep.b / batch + rep.c / batch, 1e-14 * (1 + std::abs(rep.b) + rep.c));
        EXPECT_GT(rep.a, 0.0);
        EXPECT_GT(rep.c, 0.0);
    }
}

TEST(LinearErrorTerms, OptimumStartLeavesBgfUndefined) {
    const auto rep = linear_error_terms(scalar_q(1.0, 0.5), v1(0.5), 1.0, 1.0, 1.0, 1.0);
    EXPECT_EQ(rep.a, 0.0);
    EXPECT_FALSE(rep.b_gf.has_value());
    EXPECT_FALSE(b_gf_direct(scalar_q(1.0, 0.5), v1(0.5), 1.0, 1.0, 1.0).has_value());
    EXPECT_EQ(classify_regime(1.0, rep).regime, Regime::undefined);
}

TEST(LinearErrorTerms, TwoRoutesToBgfAgree) {
    Rng rng = StreamKey(2).rng();
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int r = 0; r < 200; ++r) {
        const auto q = random_q(rng, 1 + r % 4);
        const VectorXd th0 = q.theta_star() + VectorXd::Constant(q.dim(), u(rng));
        const double T = u(rng), beq = u(rng), s = u(rng);
        const auto rep = linear_error_terms(q, th0, T, 1.0, beq, s);
        const auto direct = b_gf_direct(q, th0, T, beq, s);
        ASSERT_TRUE(rep.b_gf && direct);
        EXPECT_NEAR(*rep.b_gf, *direct, 1e-12 * std::abs(*direct));
    }
}

TEST(LinearErrorQuadrature, MatchesClosedFormsPerKind) {
    Rng rng = StreamKey(3).rng();
    for (int r = 0; r < 5; ++r) {
        const auto q = random_q(rng, 2);
        const VectorXd th0 = q.theta_star() + VectorXd::Constant(2, 1.0);
        const double T = 0.8, batch = 3, beq = 1.5, s = 0.7;
        const auto rep = linear_error_terms(q, th0, T, batch, beq, s);
        const double scale = rep.a + rep.b + rep.c;
        EXPECT_NEAR(linear_error_quadrature(q, th0, T, batch, beq, s, diffusion_matrix(SmeKind::GF, q, batch, beq, s)),
                    rep.le_gf, 1e-8 * scale);
        EXPECT_NEAR(linear_error_quadrature(q, th0, T, batch, beq, s, diffusion_matrix(SmeKind::CC, q, batch, beq, s)),
                    rep.le_cc, 1e-8 * scale);
        EXPECT_NEAR(linear_error_quadrature(q, th0, T, batch, beq, s, diffusion_matrix(SmeKind::NCC, q, batch, beq, s)),
                    rep.le_ncc, 1e-8 * scale);
    }
    EXPECT_THROW(linear_error_quadrature(scalar_q(1, 0), v1(1), 1, 1, 1, 1, diffusion_matrix(SmeKind::GF, scalar_q(1, 0), 1, 1, 1), 7),
                 std::invalid_argument);
}

TEST(SignRule, HoldsForSampledParameters) {
    Rng rng = StreamKey(4).rng();
    std::uniform_real_distribution<double> u(0.01, 10.0);
    auto sgn = [](double x) { return (x > 0) - (x < 0); };
    for (int r = 0; r < 10000; ++r) {
        const double a = u(rng), b1 = u(rng), b2 = b1 + u(rng), batch = u(rng) * 3;
        const double lhs = std::abs(-a + b1 / batch) - std::abs(-a + b2 / batch);
        EXPECT_EQ(sgn(lhs), sgn(batch - (b1 + b2) / (2 * a)));
    }
}

TEST(ClassifyRegime, TableSettings) {
    const auto s2 = classify_regime(1, scalar_report(1.0, 0.5, 1, 1.0));
    EXPECT_EQ(s2.regime, Regime::ii);
    EXPECT_EQ(s2.ordering_text(), "GF < CC ~ NCC");
    const auto s4 = classify_regime(8, scalar_report(1.0, 0.5, 8, 4.0));
    EXPECT_EQ(s4.regime, Regime::iv);
    ASSERT_EQ(s4.flags.size(), 1u);
    EXPECT_EQ(s4.flags[0], "vi: LE(CC)=0");
    EXPECT_EQ(classify_regime(1, scalar_report(10.0, 0.5, 1, 4.0)).regime, Regime::i);
    EXPECT_EQ(classify_regime(4, scalar_report(1.0, 2.0, 4, 1.0)).regime, Regime::iii);
    EXPECT_EQ(classify_regime(4, scalar_report(1.0, 0.5, 4, 1.0)).regime, Regime::v);
    EXPECT_EQ(classify_regime(1000, scalar_report(1.0, 0.5, 1000, 1.0)).regime, Regime::v);
}

TEST(ClassifyRegime, BoundariesAreReportedExplicitly) {
    const auto rep = scalar_report(1.0, 0.5, 1, 1.0);
    const double bgf = *rep.b_gf;
    EXPECT_EQ(classify_regime(bgf, rep).regime, Regime::boundary_iv_v);
    EXPECT_EQ(classify_regime(bgf - 1.0, rep).regime, Regime::boundary_iii_iv);
    const auto tie = classify_regime(bgf, rep);
    EXPECT_EQ(tie.ordering, regime_ordering(Regime::boundary_iv_v));
    const auto zero_gf = classify_regime(2 * (bgf - 1.0), rep);
    EXPECT_NE(std::find(zero_gf.flags.begin(), zero_gf.flags.end(), "LE(GF)=0"), zero_gf.flags.end());
}

TEST(ClassifyRegime, CcErrorVanishesAtTwiceBeq) {
    for (double beq : {0.5, 1.0, 4.0, 7.25}) {
        const auto rep = scalar_report(1.3, 0.7, 2 * beq, beq);
        EXPECT_NEAR(rep.le_cc, 0.0, 1e-15 * rep.a);
        EXPECT_NE(std::abs(scalar_report(1.3, 0.7, 2 * beq + 0.5, beq).le_cc), 0.0);
    }
}

TEST(ClassifyRegime, DegenerateBeqZero) {
    const auto rep = scalar_report(1.0, 2.0, 1, 0.0);
    EXPECT_EQ(rep.le_cc, rep.le_ncc);
    const double bgf = *rep.b_gf;
    ASSERT_GT(bgf, 2.0);
    EXPECT_EQ(classify_regime(1.0, rep).regime, Regime::degenerate_gf_worst);
    EXPECT_EQ(classify_regime(bgf, rep).regime, Regime::degenerate_tie);
    EXPECT_EQ(classify_regime(bgf + 1.0, rep).regime, Regime::degenerate_gf_best);
    EXPECT_EQ(classify_regime(bgf + 1.0, rep).ordering, regime_ordering(Regime::degenerate_gf_best));
}

TEST(ClassifyRegime, OrderingAgreesWithDirectComparison) {
    Rng rng = StreamKey(5).rng();
    std::uniform_real_distribution<double> u(0.05, 4.0);
    std::uniform_int_distribution<int> bdist(1, 300);
    int checked = 0;
    for (int r = 0; r < 1000; ++r) {
        const auto q = random_q(rng, 1 + r % 3);
        const VectorXd th0 = q.theta_star() + VectorXd::Constant(q.dim(), u(rng) - 2.0);
        const double batch = bdist(rng);
        const double beq = r % 10 == 0 ? 0.0 : u(rng) * 2;
        const auto rep = linear_error_terms(q, th0, u(rng), batch, beq, u(rng));
        const auto cls = classify_regime(batch, rep);
        if (cls.regime == Regime::undefined) continue;
        EXPECT_EQ(cls.ordering, ordering_from_le(rep)) << "draw " << r;
        EXPECT_EQ(regime_ordering(cls.regime), ordering_from_le(rep)) << "draw " << r << " regime " << to_string(cls.regime);
        ++checked;
    }
    EXPECT_GT(checked, 990);
}

TEST(RegimeJson, Fields) {
    const auto rep = scalar_report(1.0, 0.5, 1, 1.0);
    const auto j = regime_json(rep, classify_regime(1, rep));
    EXPECT_EQ(j["regime"], "ii");
    EXPECT_NEAR(j["B_gf"].get<double>(), 2.85914, 5e-6);
    EXPECT_NEAR(j["B_gf_minus_B_eq"].get<double>(), 1.85914, 5e-6);
}

TEST(StepsFor, DivisibilityEnforced) {
    EXPECT_EQ(steps_for(0.5, 0.1), 5u);
    EXPECT_EQ(steps_for(2.0, 0.001), 2000u);
    EXPECT_THROW(steps_for(0.5, 0.3), std::invalid_argument);
    EXPECT_THROW(steps_for(0.5, 0.0), std::invalid_argument);
}

TEST(SlopeFit, ExactPowers) {
    const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> e1, e2;
    for (double x : h) {
        e1.push_back(3.0 * x);
        e2.push_back(0.5 * x * x);
    }
    EXPECT_NEAR(slope_fit(h, e1).slope, 1.0, 1e-12);
    EXPECT_NEAR(slope_fit(h, e2).slope, 2.0, 1e-12);
    EXPECT_NEAR(std::exp(slope_fit(h, e1).intercept), 3.0, 1e-12);
}

TEST(SlopeFit, NoisyPowerAndDroppedPoints) {
    Rng rng = StreamKey(6).rng();
    std::normal_distribution<double> n01;
    std::vector<double> h, e;
    for (int k = 0; k < 12; ++k) {
        h.push_back(0.2 * std::pow(0.7, k));
        e.push_back(2.0 * std::pow(h.back(), 1.5) * std::exp(0.05 * n01(rng)));
    }
    EXPECT_NEAR(slope_fit(h, e).slope, 1.5, 0.1);
    e[3] = 0.0;
    e[5] = -1.0;
    const auto fit = slope_fit(h, e);
    EXPECT_EQ(fit.used, 10u);
    EXPECT_EQ(fit.warnings.size(), 2u);
}

TEST(WeakError, DeterministicRunIsExact) {
    // Rademacher features and no noise: chi_n - theta* = (1 - h kappa)^n e0.
    const double kappa = 2.0, T = 0.5, e0 = 1.0;
    const auto model = risk::LinRegModel::scalar(kappa, -1.0, 0.0, risk::ScalarIidFeatures{risk::ScalarLaw::rademacher});
    const std::vector<double> hs{0.1, 0.05, 0.025};
    const auto curve = weak_error_curve(model, SmeKind::GF, 1, T, -1.0 + e0, hs, 1, 7, 1);
    ASSERT_EQ(curve.points.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        const double h = hs[k];
        const double sgd = 0.5 * std::pow(1 - h * kappa, 2 * T / h) * e0 * e0;
        EXPECT_NEAR(curve.points[k].weak_error, std::abs(sgd - 0.5 * std::exp(-2 * kappa * T) * e0 * e0), 1e-14);
    }
    EXPECT_NEAR(slope_fit(curve).slope, 1.0, 0.1);
}

TEST(WeakError, MonteCarloMatchesExactSgdMoments) {
    const double kappa = 1.0, T = 0.5, s = 1.0;
    for (auto law : {risk::ScalarLaw::gaussian, risk::ScalarLaw::exponential}) {
        const auto model = risk::LinRegModel::scalar(kappa, -1.0, s, risk::ScalarIidFeatures{law});
        const auto est = estimate_sgd_excess_risk(model, 2, T, 0.0, {0.1, 0.05}, 200000, 11, 0);
        for (const auto& e : est) {
            const double exact = 0.5 * oracle::sgd_second_moment(kappa, s, 2, risk::kurtosis(law), e.h, e.steps, 1.0);
            EXPECT_NEAR(e.excess.mean, exact, 4 * e.excess.std_error) << risk::to_string(law) << " h=" << e.h;
            EXPECT_EQ(e.excess.count, 200000u);
        }
    }
}

TEST(WeakError, ThreadCountDoesNotChangeEstimates) {
    const auto model = risk::LinRegModel::scalar(1.0, -1.0, 1.0, risk::ScalarIidFeatures{});
    const auto a = estimate_sgd_excess_risk(model, 1, 0.5, 0.0, {0.1}, 5000, 3, 1);
    const auto b = estimate_sgd_excess_risk(model, 1, 0.5, 0.0, {0.1}, 5000, 3, 4);
    EXPECT_EQ(a[0].excess.mean, b[0].excess.mean);
    EXPECT_EQ(a[0].excess.std_error, b[0].excess.std_error);
}

TEST(WeakError, InvalidClosedFormIsMarked) {
    const auto model = risk::LinRegModel::scalar(10.0, -1.0, 1.0, risk::ScalarIidFeatures{risk::ScalarLaw::exponential});
    const auto curve = weak_error_curve(model, SmeKind::NCC, 1, 0.5, 0.0, {0.1, 0.01}, 100, 1, 1);
    EXPECT_FALSE(curve.points[0].valid);
    EXPECT_FALSE(curve.points[0].note.empty());
    EXPECT_TRUE(curve.points[1].valid);
    EXPECT_THROW(weak_error_curve(model, SmeKind::GF, 1, 0.5, 0.0, {0.3}, 10, 1, 1), std::invalid_argument);
}

TEST(WeakErrorTable, Columns) {
    auto t = weak_error_table();
    EXPECT_EQ(t.header(), (std::vector<std::string>{"setting_id", "kind", "h", "weak_error", "stderr", "M"}));
    const auto model = risk::LinRegModel::scalar(1.0, -1.0, 1.0, risk::ScalarIidFeatures{});
    append_weak_error_rows(t, "2", weak_error_curve(model, SmeKind::CC, 1, 0.5, 0.0, {0.1, 0.05}, 10, 1, 1));
    EXPECT_EQ(t.rows(), 2u);
}
