#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/permutons.hpp"

namespace smelab::noise {

enum class NamedScheme { single_shuffle, random_reshuffle, flipflop_single, flipflop_random };

std::string to_string(NamedScheme s);
NamedScheme named_scheme_from_string(const std::string& name);

// The copula whose pair marginals give the scheme's cross-covariances.
perm::Copula scheme_copula(NamedScheme s);

struct BridgeFamilySpec {
    std::variant<NamedScheme, perm::Copula> scheme = NamedScheme::single_shuffle;
    std::size_t epochs = 1;
    std::size_t grid = 1024;  // points per unit epoch
};

// C^{ij}(s, t), with C^{ii}(s, t) = min(s, t).
double cross_copula(const BridgeFamilySpec& spec, std::size_t i, std::size_t j, double s, double t);

// Cov(B^i_s, B^j_t) = C^{ij}(s, t) - s t.
double bridge_covariance(const BridgeFamilySpec& spec, std::size_t i, std::size_t j, double s, double t);

/** Values of a d-dimensional path on the uniform grid k * dt, k = 0..points-1 (row-major). */
struct GridPath {
    double dt = 0.0;
    std::size_t dim = 1;
    std::vector<double> values;

    [[nodiscard]] std::size_t points() const { return dim == 0 ? 0 : values.size() / dim; }
    [[nodiscard]] double horizon() const { return dt * static_cast<double>(points() - 1); }
    [[nodiscard]] double time(std::size_t k) const { return dt * static_cast<double>(k); }
    [[nodiscard]] double at(std::size_t k, std::size_t c = 0) const { return values[k * dim + c]; }
    [[nodiscard]] VectorXd row(std::size_t k) const;
    // Grid index of time t; throws when t is not on the grid.
    [[nodiscard]] std::size_t index_of(double t) const;
    // Every stride-th point.
    [[nodiscard]] GridPath subsample(std::size_t stride) const;
    [[nodiscard]] CsvTable to_csv() const;
};

/**
 * Epoch-by-epoch generator for the named schemes. Each (epoch, dimension) bridge
 * uses its own substream, and the grid is filled by sequential conditioning on
 * the odd part of m followed by dyadic midpoint refinement, so an m-grid sample is
 * the restriction of the 2m-grid sample with the same key.
 */
class NamedEpochStream {
public:
    NamedEpochStream(NamedScheme scheme, std::size_t grid, std::size_t dim, StreamKey key);

    // Next epoch's (grid + 1) x dim values, row-major; endpoints are exactly 0.
    const std::vector<double>& next();
    [[nodiscard]] std::size_t epochs_emitted() const { return emitted_; }

private:
    void fresh(std::size_t epoch);
    void reflect();

    NamedScheme scheme_;
    std::size_t grid_;
    std::size_t dim_;
    StreamKey key_;
    std::size_t emitted_ = 0;
    std::vector<double> current_;
};

// A single standard Brownian bridge on the grid {k/m}, filled as described above.
std::vector<double> sample_bridge_grid(std::size_t grid, const StreamKey& key);

class BridgeSampler {
public:
    explicit BridgeSampler(BridgeFamilySpec spec);

    [[nodiscard]] const BridgeFamilySpec& spec() const { return spec_; }
    // Smallest eigenvalue of the dense covariance before clamping (copula schemes only).
    [[nodiscard]] std::optional<double> min_eigenvalue() const { return min_eig_; }

    // Epoched bridge X on [0, J] with dt = 1/m; each dimension is an independent copy.
    [[nodiscard]] GridPath sample(std::size_t dim, Rng& rng) const;

private:
    BridgeFamilySpec spec_;
    MatrixXd factor_;
    std::optional<double> min_eig_;
};

GridPath sample_epoched_bridge(const BridgeFamilySpec& spec, std::size_t dim, Rng& rng);

/** W_t = sqrt(T) X_{t/T} + (t / sqrt(T)) V on the grid over [0, J T]. */
struct EpochedPath {
    double period = 1.0;
    std::size_t epochs = 0;
    std::size_t grid = 0;
    GridPath bridge;
    VectorXd v;
    GridPath w;

    [[nodiscard]] std::size_t dim() const { return w.dim; }
    // W at the end of epoch j (j >= 0), = (j+1) W_T.
    [[nodiscard]] VectorXd w_at_epoch_end(std::size_t j) const;
};

EpochedPath assemble_ebm(const GridPath& bridge, double T, const VectorXd& v);
EpochedPath assemble_ebm(const GridPath& bridge, double T, Rng& rng);

struct CrossCovariance {
    std::vector<double> s;
    std::vector<double> t;
    std::vector<double> estimate;   // row-major over (s, t)
    std::vector<double> std_error;
    std::size_t replicas = 0;

    [[nodiscard]] double at(std::size_t a, std::size_t b) const { return estimate[a * t.size() + b]; }
    [[nodiscard]] double se(std::size_t a, std::size_t b) const { return std_error[a * t.size() + b]; }
};

// Sample covariance of (B^i_s, B^j_t) over bridge paths, one spatial component.
CrossCovariance empirical_cross_covariance(const std::vector<GridPath>& paths, std::size_t i, std::size_t j,
                                           std::span<const double> s, std::span<const double> t,
                                           std::size_t component = 0);

}  // namespace smelab::noise
