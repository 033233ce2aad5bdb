#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smelab/core/csv.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/permutons.hpp"

namespace smelab::walks {

// Mean 0, variance 1 increments.
enum class IncrementLaw { gaussian, rademacher };

std::string to_string(IncrementLaw law);
IncrementLaw increment_law_from_string(const std::string& name);

std::vector<double> sample_increments(IncrementLaw law, std::size_t n, Rng& rng);

/**
 * J walks sharing the increments Z up to reordering: component j at t = k/N is
 * (1/sqrt(N)) sum_{m<k} Z[sigma^j(m)]. Values are right-continuous steps.
 */
struct ShuffledWalk {
    std::size_t n = 0;
    std::vector<double> z;
    perm::JPermutation jperm;
    std::vector<std::vector<double>> values;  // [component][k], k = 0..N

    [[nodiscard]] std::size_t components() const { return values.size(); }
    // X^j_t = X^j at index floor(N t).
    [[nodiscard]] double at(std::size_t component, double t) const;
};

ShuffledWalk build_shuffled_walk(std::span<const double> z, const perm::JPermutation& jperm);
ShuffledWalk build_shuffled_walk(IncrementLaw law, const perm::JPermutation& jperm, Rng& rng);

/** Path on the uniform grid k/(points-1) of [0, 1] with zero endpoints. */
struct LoopPath {
    std::vector<double> values;
};

// f minus the linear interpolant of its endpoints, f(t) - f(0) - t (f(1) - f(0)); endpoints come out exactly 0.
LoopPath phi_loop(std::span<const double> f);

// (Psi f)(t) = f^{floor(t)}_{t - floor(t)}; all loops on a common grid. Throws on nonzero endpoints.
std::vector<double> psi_concat(std::span<const LoopPath> loops);

/**
 * Centered epoched walk on [0, epochs] at t = k/N:
 * (1/sqrt(N)) sum_{m<k} Z[pi^{floor(m/N)}(m mod N)] - (t/sqrt(N)) sum Z.
 */
struct TildeWalk {
    std::size_t n = 0;
    std::size_t epochs = 0;
    std::vector<double> z;
    std::vector<double> values;  // epochs * N + 1 points
};

TildeWalk build_tilde_walk(std::span<const double> z, std::span<const perm::Permutation> perms);
TildeWalk build_tilde_walk(IncrementLaw law, std::size_t n, std::span<const perm::Permutation> perms, Rng& rng);

struct CovarianceCheckOptions {
    IncrementLaw law = IncrementLaw::gaussian;
    perm::Copula copula = perm::Copula::independence();
    std::size_t n = 1024;
    std::size_t replicas = 1000;
    std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
    std::size_t i = 0;
    std::size_t j = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    // Fixed permutations instead of fresh copula draws; the target becomes the
    // finite-N prefix-intersection count.
    std::optional<perm::JPermutation> frozen;
};

struct CovarianceRow {
    double s = 0.0;
    double t = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    double empirical = 0.0;
    double target = 0.0;
    double std_error = 0.0;
};

struct CovarianceReport {
    std::string copula;
    std::string law;
    std::size_t n = 0;
    std::size_t replicas = 0;
    std::vector<CovarianceRow> rows;

    // Largest |empirical - target| / stderr over the rows.
    [[nodiscard]] double max_z() const;
    [[nodiscard]] CsvTable to_csv() const;
};

/**
 * Sample covariance of (X^i_s, X^j_t) over replicas with fresh increments and,
 * unless frozen, fresh permutations sigma^j = (Perm-sampled tau^j)^{-1}.
 */
CovarianceReport covariance_check(const CovarianceCheckOptions& options);

}  // namespace smelab::walks
