#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/core/parallel.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/core/stats.hpp"

using namespace smelab;

TEST(StreamKey, SameLabelsGiveIdenticalStreams) {
    Rng a = derive_stream(7, {"weak-error", std::uint64_t{17}, "data"});
    Rng b = derive_stream(7, {"weak-error", std::uint64_t{17}, "data"});
    for (int k = 0; k < 1000; ++k) ASSERT_EQ(a(), b());
}

TEST(StreamKey, NestedDerivationIsAssociative) {
    const StreamKey root(42);
    EXPECT_EQ(root.child("a").child(std::uint64_t{3}).child("b"), root.child({"a", std::uint64_t{3}, "b"}));
    EXPECT_EQ(root.child({"a"}).child({std::uint64_t{3}, "b"}), root.child({"a", std::uint64_t{3}, "b"}));
}

TEST(StreamKey, LabelKindsAndPrefixesAreDistinguished) {
    const StreamKey root(1);
    std::set<std::uint64_t> seen;
    seen.insert(root.child("1").value());
    seen.insert(root.child(std::uint64_t{1}).value());
    seen.insert(root.child("ab").value());
    seen.insert(root.child("a").child("b").value());
    seen.insert(root.child("data").value());
    seen.insert(root.child("perm").value());
    seen.insert(StreamKey(2).child("data").value());
    EXPECT_EQ(seen.size(), 7u);
}

TEST(StreamKey, DistinctLabelsShowNoSharedPrefixOrCorrelation) {
    Rng a = derive_stream(3, {"weak-error", std::uint64_t{0}, "data"});
    Rng b = derive_stream(3, {"weak-error", std::uint64_t{0}, "perm"});
    const std::size_t n = 1000000;
    std::uniform_real_distribution<double> u01;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    std::size_t equal_words = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto wa = a(), wb = b();
        equal_words += wa == wb ? 1 : 0;
        const double x = static_cast<double>(wa >> 11) * 0x1.0p-53 - 0.5;
        const double y = static_cast<double>(wb >> 11) * 0x1.0p-53 - 0.5;
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    EXPECT_EQ(equal_words, 0u);
    const double nd = static_cast<double>(n);
    const double corr = (sab / nd - sa * sb / nd / nd) / std::sqrt((saa / nd) * (sbb / nd));
    // sd of the sample correlation is 1/sqrt(n) = 1e-3.
    EXPECT_LT(std::abs(corr), 5e-3);
}

TEST(Stats, PairwiseSumMatchesNaiveOnSmallInput) {
    std::vector<double> v{1.0, 2.0, 3.5, -1.25};
    EXPECT_DOUBLE_EQ(pairwise_sum(v), 5.25);
    EXPECT_DOUBLE_EQ(mean(v), 1.3125);
}

TEST(Stats, SampleVarianceAndCovariance) {
    std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
    EXPECT_NEAR(sample_variance(x), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(sample_covariance(x, y).cov, 10.0 / 3.0, 1e-15);
}

TEST(Stats, LeastSquaresRecoversExactLine) {
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto fit = least_squares(x, y);
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
}

TEST(Stats, BatchMeansFallsBackToIidForShortSamples) {
    std::vector<double> v{1, 2, 3, 4, 5};
    const auto a = batch_means(v, 32);
    const auto b = iid_mean(v);
    EXPECT_DOUBLE_EQ(a.mean, b.mean);
    EXPECT_DOUBLE_EQ(a.std_error, b.std_error);
}

TEST(Csv, SeventeenDigitsAndNoLocale) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(2.0), "2");
    CsvTable t({"a", "b"});
    t.add_row({1.5, std::int64_t{-2}});
    t.add_row({std::string("x"), std::uint64_t{3}});
    EXPECT_EQ(t.str(), "a,b\n1.5,-2\nx,3\n");
}

TEST(Linalg, SqrtMultipliesBack) {
    MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const MatrixXd q = sym_sqrt_psd(a);
    EXPECT_LT((q * q - a).norm(), 1e-12);
    EXPECT_TRUE(is_symmetric(q));
}

TEST(Linalg, SymExpMatchesScalar) {
    MatrixXd a = MatrixXd::Identity(2, 2) * 0.5;
    EXPECT_NEAR(sym_exp(a, 2.0)(0, 0), std::exp(1.0), 1e-14);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
    auto run = [](unsigned threads) {
        std::vector<double> out(1000);
        parallel_for(out.size(), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                Rng rng = StreamKey(9).child(static_cast<std::uint64_t>(r)).rng();
                out[r] = std::normal_distribution<double>()(rng);
            }
        });
        return pairwise_sum(out);
    };
    EXPECT_EQ(run(1), run(4));
}

TEST(Parallel, RethrowsWorkerException) {
    EXPECT_THROW(parallel_for(10, 2, [](std::size_t lo, std::size_t) {
                     if (lo == 0) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}
