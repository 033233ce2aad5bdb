#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smelab/core/csv.hpp"
#include "smelab/core/rng.hpp"

namespace smelab::perm {

// One-line notation, 0-based: p[k] is the image of k.
using Permutation = std::vector<std::size_t>;

bool is_permutation(std::span<const std::size_t> p);
Permutation identity(std::size_t n);
Permutation reversal(std::size_t n);
Permutation inverse(std::span<const std::size_t> p);
// (a o b)(k) = a[b[k]]
Permutation compose(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Adapters for the 1-based one-line notation used in serialized output.
std::vector<std::int64_t> to_one_based(std::span<const std::size_t> p);
Permutation from_one_based(std::span<const std::int64_t> p);

// Rows of 1-based one-line notation, columns p1..pN.
CsvTable permutations_csv(const std::vector<Permutation>& perms);

/** Stable ranks: 0-based version of Perm(v)(k) = 1 + #{l : v_l < v_k} + #{l < k : v_l = v_k}. */
Permutation perm_of(std::span<const double> v);

/** J permutations of {0, ..., N-1}. */
struct JPermutation {
    std::vector<Permutation> perms;

    [[nodiscard]] std::size_t size() const { return perms.empty() ? 0 : perms.front().size(); }
    [[nodiscard]] std::size_t components() const { return perms.size(); }
    // Throws std::invalid_argument unless every component is a bijection of a common size.
    void validate() const;
};

JPermutation inverse(const JPermutation& tau);

enum class ArchimedeanFamily { clayton, gumbel, frank };
enum class GeneratorDirection { phi, phi_inverse };

std::string to_string(ArchimedeanFamily family);
ArchimedeanFamily family_from_string(const std::string& name);

// Throws std::invalid_argument when theta is outside the family's range.
void check_theta(ArchimedeanFamily family, double theta);

// phi (the Laplace-transform-type generator) or its inverse, per family.
double archimedean_generator(ArchimedeanFamily family, double theta, GeneratorDirection direction, double arg);

enum class CopulaKind {
    comonotone,
    independence,
    countermonotone,
    flipflop_single,
    flipflop_random,
    archimedean,
    finite
};

std::string to_string(CopulaKind kind);

/**
 * Distribution function of a permuton on [0,1]^J (J possibly unbounded) together
 * with an exact sampler. Coordinates are addressed by index so that infinite
 * families are handled through finite marginals.
 */
class Copula {
public:
    static Copula comonotone();
    static Copula independence();
    static Copula countermonotone();
    static Copula flipflop_single();
    static Copula flipflop_random();
    static Copula archimedean(ArchimedeanFamily family, double theta);
    static Copula finite(JPermutation tau);

    [[nodiscard]] CopulaKind kind() const { return kind_; }
    [[nodiscard]] ArchimedeanFamily family() const { return family_; }
    [[nodiscard]] double theta() const { return theta_; }
    [[nodiscard]] const JPermutation& source() const { return tau_; }
    // Largest supported number of coordinates, if bounded.
    [[nodiscard]] std::optional<std::size_t> max_dim() const;
    [[nodiscard]] std::string name() const;

    // Marginal distribution function F^a(t) with a = index; t[k] belongs to coordinate index[k].
    [[nodiscard]] double eval(std::span<const double> t, std::span<const std::size_t> index) const;
    // Coordinates 0..t.size()-1.
    [[nodiscard]] double eval(std::span<const double> t) const;
    [[nodiscard]] double eval_pair(std::size_t i, std::size_t j, double s, double t) const;

    /**
     * Writes coordinates 0..out.size()-1 of one point. Row-level variables are
     * drawn first and coordinates in order, so a shorter request is a prefix
     * of a longer one under the same stream state.
     */
    void sample(Rng& rng, std::span<double> out) const;

private:
    Copula(CopulaKind kind) : kind_(kind) {}
    void check_dim(std::size_t dims) const;

    CopulaKind kind_;
    ArchimedeanFamily family_ = ArchimedeanFamily::clayton;
    double theta_ = 0.0;
    JPermutation tau_;
};

// Pairwise-only specifications cannot be turned into a sampler in general; always throws.
[[noreturn]] void reject_pairwise_family(const std::string& description);

/** sigma^j = perm_of(column j) for N i.i.d. points drawn from the copula. */
JPermutation sample_jpermutation(const Copula& copula, std::size_t n, std::size_t j, Rng& rng);

enum class EmpiricalMode { point_mass, smoothed };

/**
 * Distribution function of the permuton of a J-permutation tau. point_mass puts
 * mass 1/N at (tau^0(k)+1, ..., tau^{J-1}(k)+1)/N; smoothed spreads it uniformly
 * over the cube with that upper corner.
 */
class EmpiricalPermuton {
public:
    EmpiricalPermuton(JPermutation source, EmpiricalMode mode);

    [[nodiscard]] const JPermutation& source() const { return tau_; }
    [[nodiscard]] EmpiricalMode mode() const { return mode_; }

    // All J coordinates.
    [[nodiscard]] double cdf(std::span<const double> t) const;
    [[nodiscard]] double cdf_pair(std::size_t i, std::size_t j, double s, double t) const;

    // F^{ij} on grid x grid, row-major by the s coordinate; O((N + G^2) log N).
    [[nodiscard]] std::vector<double> grid_cdf_pair(std::size_t i, std::size_t j,
                                                    std::span<const double> grid) const;

private:
    JPermutation tau_;
    EmpiricalMode mode_;
};

// |sigma^i[Ns] cap sigma^j[Nt]| / N, where [x] is the prefix {0, ..., floor(x)-1}.
double prefix_intersection(const JPermutation& sigma, std::size_t i, std::size_t j, double s, double t);

// Points k/resolution, k = 1..resolution.
std::vector<double> unit_grid(std::size_t resolution);

using CdfFunction = std::function<double(std::span<const double>)>;

// Max |f1 - f2| over the tensor grid unit_grid(resolution)^dims.
double ks_distance(const CdfFunction& f1, const CdfFunction& f2, std::size_t dims, std::size_t resolution = 64);

// Pair fast path: smoothed permuton of tau (components i, j) against copula pair (ci, cj).
double ks_distance_pair(const EmpiricalPermuton& p, std::size_t i, std::size_t j, const Copula& c,
                        std::size_t ci, std::size_t cj, std::size_t resolution = 64);

}  // namespace smelab::perm
