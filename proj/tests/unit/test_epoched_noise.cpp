#include <gtest/gtest.h>

#include <cmath>

#include "smelab/core/rng.hpp"
#include "smelab/core/stats.hpp"
#include "smelab/epoched_noise.hpp"

using namespace smelab;
using namespace smelab::noise;

namespace {

std::vector<GridPath> draw_paths(const BridgeFamilySpec& spec, std::size_t count, std::uint64_t seed) {
    const BridgeSampler sampler(spec);
    Rng rng = StreamKey(seed).rng();
    std::vector<GridPath> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) out.push_back(sampler.sample(1, rng));
    return out;
}

const NamedScheme kNamed[] = {NamedScheme::single_shuffle, NamedScheme::random_reshuffle, NamedScheme::flipflop_single,
                              NamedScheme::flipflop_random};

}  // namespace

TEST(BridgeCovariance, HandValues) {
    const BridgeFamilySpec ss{NamedScheme::single_shuffle, 2, 8};
    EXPECT_NEAR(bridge_covariance(ss, 0, 0, 0.25, 0.75), 0.0625, 1e-15);
    EXPECT_NEAR(bridge_covariance(ss, 0, 1, 0.25, 0.75), 0.0625, 1e-15);
    const BridgeFamilySpec ff{NamedScheme::flipflop_single, 2, 8};
    EXPECT_NEAR(bridge_covariance(ff, 0, 1, 0.6, 0.6), -0.16, 1e-15);
    EXPECT_NEAR(bridge_covariance(ff, 1, 1, 0.6, 0.6), 0.24, 1e-15);
    const BridgeFamilySpec rr{NamedScheme::random_reshuffle, 2, 8};
    EXPECT_NEAR(bridge_covariance(rr, 0, 1, 0.3, 0.8), 0.0, 1e-15);
    const BridgeFamilySpec cl{perm::Copula::archimedean(perm::ArchimedeanFamily::clayton, 1.0), 2, 8};
    EXPECT_NEAR(bridge_covariance(cl, 0, 1, 0.5, 0.5), 1.0 / 3.0 - 0.25, 1e-15);
    EXPECT_NEAR(bridge_covariance(cl, 1, 1, 0.5, 0.5), 0.25, 1e-15);
}

TEST(SchemeNames, RoundTripAndAliases) {
    for (auto s : kNamed) EXPECT_EQ(named_scheme_from_string(to_string(s)), s);
    EXPECT_EQ(named_scheme_from_string("random_reshuffle"), NamedScheme::random_reshuffle);
    EXPECT_THROW(named_scheme_from_string("GD"), std::invalid_argument);
}

TEST(GridPath, IndexingAndSubsampling) {
    GridPath p;
    p.dt = 0.25;
    p.dim = 2;
    for (int k = 0; k <= 8; ++k) {
        p.values.push_back(k);
        p.values.push_back(-k);
    }
    EXPECT_EQ(p.points(), 9u);
    EXPECT_DOUBLE_EQ(p.horizon(), 2.0);
    EXPECT_EQ(p.index_of(1.5), 6u);
    EXPECT_THROW((void)p.index_of(0.3), std::invalid_argument);
    EXPECT_THROW((void)p.index_of(2.25), std::invalid_argument);
    EXPECT_EQ(p.row(3)(1), -3.0);
    const auto s = p.subsample(4);
    EXPECT_EQ(s.points(), 3u);
    EXPECT_DOUBLE_EQ(s.dt, 1.0);
    EXPECT_EQ(s.at(2, 0), 8.0);
    EXPECT_THROW(p.subsample(3), std::invalid_argument);
    EXPECT_EQ(p.subsample(8).to_csv().str(), "t,x0,x1\n0,0,0\n2,8,-8\n");
}

TEST(BridgeGrid, EndpointsAndRestriction) {
    const StreamKey key = StreamKey(1).child("bridge");
    for (std::size_t m : {2u, 3u, 12u, 1024u}) {
        const auto a = sample_bridge_grid(m, key);
        const auto b = sample_bridge_grid(2 * m, key);
        ASSERT_EQ(a.size(), m + 1);
        EXPECT_EQ(a.front(), 0.0);
        EXPECT_EQ(a.back(), 0.0);
        for (std::size_t k = 0; k <= m; ++k) EXPECT_EQ(a[k], b[2 * k]) << "m=" << m << " k=" << k;
    }
    EXPECT_THROW(sample_bridge_grid(1, key), std::invalid_argument);
}

TEST(BridgeGrid, MarginalVarianceAndIncrementCovariance) {
    const std::size_t m = 12, n = 60000;
    std::vector<std::vector<double>> cols(m + 1, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto b = sample_bridge_grid(m, StreamKey(2).child(r));
        for (std::size_t k = 0; k <= m; ++k) cols[k][r] = b[k];
    }
    for (std::size_t k = 1; k < m; ++k) {
        const double t = static_cast<double>(k) / m;
        EXPECT_NEAR(sample_variance(cols[k]), t * (1 - t), 3.5 * t * (1 - t) * std::sqrt(2.0 / n)) << "k=" << k;
        const double s = 3.0 / m;
        const auto c = sample_covariance(cols[3], cols[k]);
        EXPECT_NEAR(c.cov, std::min(s, t) - s * t, 4 * c.std_error) << "k=" << k;
    }
}

TEST(NamedEpochStream, StructuralIdentities) {
    const std::size_t m = 16;
    for (auto scheme : kNamed) {
        NamedEpochStream stream(scheme, m, 2, StreamKey(3));
        std::vector<std::vector<double>> ep;
        for (int j = 0; j < 4; ++j) ep.push_back(stream.next());
        EXPECT_EQ(stream.epochs_emitted(), 4u);
        for (const auto& e : ep)
            for (std::size_t c = 0; c < 2; ++c) {
                EXPECT_EQ(e[c], 0.0);
                EXPECT_EQ(e[m * 2 + c], 0.0);
            }
        auto reflected = [&](const std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t k = 0; k <= m; ++k)
                for (std::size_t c = 0; c < 2; ++c)
                    if (b[k * 2 + c] != -a[(m - k) * 2 + c]) return false;
            return true;
        };
        switch (scheme) {
            case NamedScheme::single_shuffle:
                EXPECT_EQ(ep[1], ep[0]);
                EXPECT_EQ(ep[3], ep[0]);
                break;
            case NamedScheme::random_reshuffle:
                EXPECT_NE(ep[1], ep[0]);
                break;
            case NamedScheme::flipflop_single:
                EXPECT_TRUE(reflected(ep[0], ep[1]));
                EXPECT_EQ(ep[2], ep[0]);
                break;
            case NamedScheme::flipflop_random:
                EXPECT_TRUE(reflected(ep[0], ep[1]));
                EXPECT_TRUE(reflected(ep[2], ep[3]));
                EXPECT_NE(ep[2], ep[0]);
                break;
        }
        // Spatial components are distinct copies.
        EXPECT_NE(ep[0][2], ep[0][3]);
    }
}

TEST(BridgeSampler, EpochEndpointsVanish) {
    std::vector<BridgeFamilySpec> specs;
    for (auto s : kNamed) specs.push_back({s, 3, 8});
    specs.push_back({perm::Copula::archimedean(perm::ArchimedeanFamily::gumbel, 2.0), 3, 8});
    for (const auto& spec : specs) {
        Rng rng = StreamKey(4).rng();
        const auto p = BridgeSampler(spec).sample(2, rng);
        EXPECT_EQ(p.points(), 25u);
        for (std::size_t j = 0; j <= 3; ++j)
            for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(p.at(j * 8, c), 0.0);
    }
}

TEST(BridgeSampler, NamedRefinementIsRestriction) {
    for (auto s : kNamed) {
        Rng a = StreamKey(5).rng(), b = StreamKey(5).rng();
        const auto coarse = BridgeSampler({s, 3, 6}).sample(2, a);
        const auto fine = BridgeSampler({s, 3, 12}).sample(2, b);
        const auto restricted = fine.subsample(2);
        EXPECT_EQ(coarse.values, restricted.values) << to_string(s);
    }
}

TEST(BridgeSampler, CopulaCovarianceIsPsdAfterClamp) {
    using F = perm::ArchimedeanFamily;
    const std::vector<perm::Copula> cs{perm::Copula::archimedean(F::clayton, 2.0), perm::Copula::archimedean(F::gumbel, 1.5),
                                       perm::Copula::archimedean(F::frank, 4.0), perm::Copula::comonotone(),
                                       perm::Copula::flipflop_single(), perm::Copula::independence()};
    for (const auto& c : cs) {
        const BridgeSampler s({c, 3, 16});
        ASSERT_TRUE(s.min_eigenvalue().has_value());
        EXPECT_GE(*s.min_eigenvalue(), -1e-10) << c.name();
    }
    EXPECT_FALSE(BridgeSampler({NamedScheme::random_reshuffle, 3, 16}).min_eigenvalue().has_value());
    EXPECT_THROW(BridgeSampler({perm::Copula::countermonotone(), 3, 16}), std::invalid_argument);
    EXPECT_THROW(BridgeSampler({perm::Copula::independence(), 3, 9000}), std::invalid_argument);
    EXPECT_THROW(BridgeSampler({NamedScheme::single_shuffle, 0, 16}), std::invalid_argument);
}

TEST(BridgeSampler, MarginalVarianceEveryScheme) {
    std::vector<BridgeFamilySpec> specs;
    for (auto s : kNamed) specs.push_back({s, 2, 8});
    specs.push_back({perm::Copula::archimedean(perm::ArchimedeanFamily::clayton, 2.0), 2, 8});
    const std::size_t n = 40000;
    for (const auto& spec : specs) {
        const auto paths = draw_paths(spec, n, 6);
        const std::vector<double> grid{0.125, 0.25, 0.5, 0.875};
        for (std::size_t j = 0; j < 2; ++j) {
            const auto cov = empirical_cross_covariance(paths, j, j, grid, grid);
            for (std::size_t a = 0; a < grid.size(); ++a) {
                const double t = grid[a];
                EXPECT_NEAR(cov.at(a, a), t * (1 - t), 3.5 * t * (1 - t) * std::sqrt(2.0 / n));
            }
        }
    }
}

TEST(BridgeSampler, CrossCovarianceMatchesCopula) {
    const std::vector<double> s{0.25, 0.5, 0.75}, t{0.25, 0.6, 0.75};
    std::vector<BridgeFamilySpec> specs;
    for (auto sc : kNamed) specs.push_back({sc, 3, 20});
    specs.push_back({perm::Copula::archimedean(perm::ArchimedeanFamily::clayton, 2.0), 3, 20});
    specs.push_back({perm::Copula::archimedean(perm::ArchimedeanFamily::frank, 5.0), 3, 20});
    for (const auto& spec : specs) {
        const auto paths = draw_paths(spec, 30000, 7);
        for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 2}, {0, 2}}) {
            const auto cov = empirical_cross_covariance(paths, i, j, s, t);
            EXPECT_EQ(cov.replicas, 30000u);
            for (std::size_t a = 0; a < s.size(); ++a)
                for (std::size_t b = 0; b < t.size(); ++b) {
                    const double target = bridge_covariance(spec, i, j, s[a], t[b]);
                    EXPECT_NEAR(cov.at(a, b), target, 4.0 * cov.se(a, b) + 1e-12) << i << "," << j << " at " << s[a] << "," << t[b];
                }
        }
    }
}

TEST(BridgeSampler, NamedAndCopulaRoutesAgree) {
    // The structural sampler and the dense copula factorization describe the same law.
    const std::vector<double> g{0.25, 0.5, 0.75};
    for (auto sc : kNamed) {
        const auto named = draw_paths({sc, 2, 8}, 30000, 8);
        const auto dense = draw_paths({scheme_copula(sc), 2, 8}, 30000, 9);
        const auto a = empirical_cross_covariance(named, 0, 1, g, g);
        const auto b = empirical_cross_covariance(dense, 0, 1, g, g);
        for (std::size_t k = 0; k < a.estimate.size(); ++k)
            EXPECT_NEAR(a.estimate[k], b.estimate[k], 4.0 * std::hypot(a.std_error[k], b.std_error[k]) + 1e-12) << to_string(sc);
    }
}

TEST(AssembleEbm, EpochEndsAreMultiples) {
    Rng rng = StreamKey(10).rng();
    const auto bridge = BridgeSampler({NamedScheme::random_reshuffle, 5, 16}).sample(3, rng);
    const auto p = assemble_ebm(bridge, 2.5, rng);
    EXPECT_EQ(p.epochs, 5u);
    EXPECT_EQ(p.grid, 16u);
    EXPECT_DOUBLE_EQ(p.w.dt, 2.5 / 16);
    EXPECT_EQ(p.w.row(0), VectorXd::Zero(3));
    const VectorXd wt = p.w_at_epoch_end(0);
    EXPECT_LT((wt - std::sqrt(2.5) * p.v).norm(), 1e-15);
    for (std::size_t j = 1; j < 5; ++j)
        for (Eigen::Index c = 0; c < 3; ++c)
            EXPECT_NEAR(p.w_at_epoch_end(j)(c), static_cast<double>(j + 1) * wt(c), 1e-15 * (j + 1) * std::abs(wt(c)));
}

TEST(AssembleEbm, SingleShuffleRepeatsIncrements) {
    Rng rng = StreamKey(11).rng();
    const auto bridge = BridgeSampler({NamedScheme::single_shuffle, 4, 32}).sample(2, rng);
    const auto p = assemble_ebm(bridge, 0.7, rng);
    const VectorXd wt = p.w_at_epoch_end(0);
    for (std::size_t k = 0; k + 32 < p.w.points(); ++k)
        EXPECT_LT((p.w.row(k + 32) - p.w.row(k) - wt).norm(), 1e-13);
}

TEST(AssembleEbm, Validation) {
    Rng rng = StreamKey(12).rng();
    const auto bridge = BridgeSampler({NamedScheme::single_shuffle, 2, 8}).sample(2, rng);
    EXPECT_THROW(assemble_ebm(bridge, 0.0, rng), std::invalid_argument);
    EXPECT_THROW(assemble_ebm(bridge, 1.0, VectorXd::Zero(3)), std::invalid_argument);
}

TEST(AssembleEbm, IncrementVarianceOfBrownianMotion) {
    // With RR the assembled motion restricted to one epoch is a Brownian motion: Var W_t = t.
    const double T = 2.0;
    const std::size_t n = 40000;
    const BridgeSampler sampler({NamedScheme::random_reshuffle, 2, 8});
    Rng rng = StreamKey(13).rng();
    std::vector<double> a(n), b(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto p = assemble_ebm(sampler.sample(1, rng), T, rng);
        a[r] = p.w.at(4);   // t = 1
        b[r] = p.w.at(12);  // t = 3
    }
    EXPECT_NEAR(sample_variance(a), 1.0, 3.5 * std::sqrt(2.0 / n));
    // Cov(W_1, W_3) = 1 * 3 / T (drift part), bridges of distinct epochs being independent.
    const auto c = sample_covariance(a, b);
    EXPECT_NEAR(c.cov, 1.5, 4 * c.std_error);
}
