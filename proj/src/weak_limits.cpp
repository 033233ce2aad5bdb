#include "smelab/weak_limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smelab/core/parallel.hpp"
#include "smelab/core/stats.hpp"

namespace smelab::walks {

namespace {

std::size_t step_index(double t, std::size_t n) {
    if (!(t > 0.0)) return 0;
    const double f = std::floor(static_cast<double>(n) * t);
    return f >= static_cast<double>(n) ? n : static_cast<std::size_t>(f);
}

}  // namespace

std::string to_string(IncrementLaw law) { return law == IncrementLaw::gaussian ? "gaussian" : "rademacher"; }

IncrementLaw increment_law_from_string(const std::string& name) {
    if (name == "gaussian") return IncrementLaw::gaussian;
    if (name == "rademacher") return IncrementLaw::rademacher;
    throw std::invalid_argument("unknown increment law: " + name);
}

std::vector<double> sample_increments(IncrementLaw law, std::size_t n, Rng& rng) {
    std::vector<double> z(n);
    if (law == IncrementLaw::gaussian) {
        std::normal_distribution<double> n01;
        for (auto& v : z) v = n01(rng);
    } else {
        for (auto& v : z) v = (rng() >> 63) ? 1.0 : -1.0;
    }
    return z;
}

double ShuffledWalk::at(std::size_t component, double t) const { return values.at(component)[step_index(t, n)]; }

ShuffledWalk build_shuffled_walk(std::span<const double> z, const perm::JPermutation& jperm) {
    jperm.validate();
    if (jperm.size() != z.size()) throw std::invalid_argument("permutation size differs from the number of increments");
    ShuffledWalk w;
    w.n = z.size();
    w.z.assign(z.begin(), z.end());
    w.jperm = jperm;
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.n));
    // Every component ends at the same total, independent of summation order.
    const double total = pairwise_sum(z) * scale;
    for (const auto& sigma : jperm.perms) {
        std::vector<double> path(w.n + 1, 0.0);
        double s = 0.0;
        for (std::size_t m = 0; m < w.n; ++m) {
            s += z[sigma[m]];
            path[m + 1] = s * scale;
        }
        path[w.n] = total;
        w.values.push_back(std::move(path));
    }
    return w;
}

ShuffledWalk build_shuffled_walk(IncrementLaw law, const perm::JPermutation& jperm, Rng& rng) {
    const auto z = sample_increments(law, jperm.size(), rng);
    return build_shuffled_walk(z, jperm);
}

LoopPath phi_loop(std::span<const double> f) {
    if (f.size() < 2) throw std::invalid_argument("loop needs at least two grid points");
    const double cells = static_cast<double>(f.size() - 1);
    LoopPath out;
    out.values.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = static_cast<double>(k) / cells;
        out.values[k] = f[k] - f[0] - t * (f.back() - f[0]);
    }
    return out;
}

std::vector<double> psi_concat(std::span<const LoopPath> loops) {
    if (loops.empty()) throw std::invalid_argument("psi_concat needs at least one loop");
    const std::size_t points = loops.front().values.size();
    if (points < 2) throw std::invalid_argument("loop needs at least two grid points");
    const std::size_t cells = points - 1;
    std::vector<double> out(loops.size() * cells + 1, 0.0);
    for (std::size_t j = 0; j < loops.size(); ++j) {
        const auto& v = loops[j].values;
        if (v.size() != points) throw std::invalid_argument("loops must share a grid");
        if (v.front() != 0.0 || v.back() != 0.0)
            throw std::invalid_argument("loop " + std::to_string(j) + " has nonzero endpoints");
        for (std::size_t k = 0; k < cells; ++k) out[j * cells + k] = v[k];
    }
    return out;
}

TildeWalk build_tilde_walk(std::span<const double> z, std::span<const perm::Permutation> perms) {
    const std::size_t n = z.size();
    if (n == 0) throw std::invalid_argument("tilde walk needs N >= 1");
    if (perms.empty()) throw std::invalid_argument("tilde walk needs at least one epoch");
    for (const auto& p : perms)
        if (p.size() != n || !perm::is_permutation(p))
            throw std::invalid_argument("every epoch needs a permutation of {0, ..., N-1}");
    TildeWalk w;
    w.n = n;
    w.epochs = perms.size();
    w.z.assign(z.begin(), z.end());
    const double total = pairwise_sum(z);
    const double rn = std::sqrt(static_cast<double>(n));
    w.values.assign(w.epochs * n + 1, 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < w.epochs * n; ++k) {
        s += z[perms[k / n][k % n]];
        const double t = static_cast<double>(k + 1) / static_cast<double>(n);
        w.values[k + 1] = s / rn - t * total / rn;
    }
    return w;
}

TildeWalk build_tilde_walk(IncrementLaw law, std::size_t n, std::span<const perm::Permutation> perms, Rng& rng) {
    const auto z = sample_increments(law, n, rng);
    return build_tilde_walk(z, perms);
}

double CovarianceReport::max_z() const {
    double worst = 0.0;
    for (const auto& r : rows) {
        const double diff = std::abs(r.empirical - r.target);
        const double z = r.std_error > 0.0 ? diff / r.std_error : (diff > 0.0 ? INFINITY : 0.0);
        worst = std::max(worst, z);
    }
    return worst;
}

CsvTable CovarianceReport::to_csv() const {
    CsvTable table({"s", "t", "i", "j", "empirical_cov", "target", "stderr"});
    for (const auto& r : rows)
        table.add_row({r.s, r.t, static_cast<std::uint64_t>(r.i), static_cast<std::uint64_t>(r.j), r.empirical,
                       r.target, r.std_error});
    return table;
}

CovarianceReport covariance_check(const CovarianceCheckOptions& o) {
    if (o.n == 0) throw std::invalid_argument("N must be positive");
    if (o.replicas < 2) throw std::invalid_argument("covariance check needs at least two replicas");
    if (o.grid.empty()) throw std::invalid_argument("evaluation grid is empty");
    for (double g : o.grid)
        if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("grid points must lie in [0, 1]");
    const std::size_t comps = std::max(o.i, o.j) + 1;
    if (o.frozen) {
        o.frozen->validate();
        if (o.frozen->size() != o.n || o.frozen->components() < comps)
            throw std::invalid_argument("frozen permutations do not match N and the requested components");
    } else if (auto md = o.copula.max_dim(); md && comps > *md) {
        throw std::invalid_argument(o.copula.name() + " has only " + std::to_string(*md) + " coordinates");
    }

    const std::size_t g = o.grid.size();
    // xs[a][r] = X^i_{s_a}, yt[b][r] = X^j_{t_b} for replica r.
    std::vector<std::vector<double>> xs(g, std::vector<double>(o.replicas));
    std::vector<std::vector<double>> yt(g, std::vector<double>(o.replicas));
    const StreamKey root = StreamKey(o.seed).child("shuffled-walk");
    parallel_for(o.replicas, o.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            const StreamKey key = root.child(static_cast<std::uint64_t>(r));
            perm::JPermutation sigma;
            if (o.frozen) {
                sigma = *o.frozen;
            } else {
                Rng prng = key.child("perm").rng();
                sigma = perm::inverse(perm::sample_jpermutation(o.copula, o.n, comps, prng));
            }
            Rng zrng = key.child("data").rng();
            const auto walk = build_shuffled_walk(o.law, sigma, zrng);
            for (std::size_t a = 0; a < g; ++a) {
                xs[a][r] = walk.at(o.i, o.grid[a]);
                yt[a][r] = walk.at(o.j, o.grid[a]);
            }
        }
    });

    CovarianceReport rep;
    rep.copula = o.frozen ? std::string("frozen") : o.copula.name();
    rep.law = to_string(o.law);
    rep.n = o.n;
    rep.replicas = o.replicas;
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = 0; b < g; ++b) {
            const auto est = sample_covariance(xs[a], yt[b]);
            CovarianceRow row;
            row.s = o.grid[a];
            row.t = o.grid[b];
            row.i = o.i;
            row.j = o.j;
            row.empirical = est.cov;
            row.std_error = est.std_error;
            if (o.frozen)
                row.target = perm::prefix_intersection(*o.frozen, o.i, o.j, row.s, row.t);
            else
                row.target = o.i == o.j ? std::min(row.s, row.t) : o.copula.eval_pair(o.i, o.j, row.s, row.t);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

}  // namespace smelab::walks
