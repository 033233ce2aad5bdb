#include "smelab/epoched_noise.hpp"

#include <cmath>
#include <stdexcept>

#include "smelab/core/errors.hpp"
#include "smelab/core/stats.hpp"

namespace smelab::noise {

namespace {

constexpr std::size_t kMaxDenseDim = 20000;

std::size_t on_grid(double x, double dt) {
    const double k = std::round(x / dt);
    if (k < 0.0 || std::abs(k * dt - x) > 1e-9 * std::max(1.0, std::abs(x)))
        throw std::invalid_argument("time " + format_double(x) + " is not on the grid");
    return static_cast<std::size_t>(k);
}

}  // namespace

std::string to_string(NamedScheme s) {
    switch (s) {
        case NamedScheme::single_shuffle: return "SS";
        case NamedScheme::random_reshuffle: return "RR";
        case NamedScheme::flipflop_single: return "flipflop_single";
        case NamedScheme::flipflop_random: return "flipflop_random";
    }
    return "?";
}

NamedScheme named_scheme_from_string(const std::string& name) {
    if (name == "SS" || name == "single_shuffle") return NamedScheme::single_shuffle;
    if (name == "RR" || name == "random_reshuffle") return NamedScheme::random_reshuffle;
    if (name == "flipflop_single") return NamedScheme::flipflop_single;
    if (name == "flipflop_random") return NamedScheme::flipflop_random;
    throw std::invalid_argument("unknown bridge scheme: " + name);
}

perm::Copula scheme_copula(NamedScheme s) {
    switch (s) {
        case NamedScheme::single_shuffle: return perm::Copula::comonotone();
        case NamedScheme::random_reshuffle: return perm::Copula::independence();
        case NamedScheme::flipflop_single: return perm::Copula::flipflop_single();
        case NamedScheme::flipflop_random: return perm::Copula::flipflop_random();
    }
    throw std::invalid_argument("unknown scheme");
}

double cross_copula(const BridgeFamilySpec& spec, std::size_t i, std::size_t j, double s, double t) {
    if (i == j) return std::min(s, t);
    if (const auto* n = std::get_if<NamedScheme>(&spec.scheme)) return scheme_copula(*n).eval_pair(i, j, s, t);
    return std::get<perm::Copula>(spec.scheme).eval_pair(i, j, s, t);
}

double bridge_covariance(const BridgeFamilySpec& spec, std::size_t i, std::size_t j, double s, double t) {
    return cross_copula(spec, i, j, s, t) - s * t;
}

VectorXd GridPath::row(std::size_t k) const {
    VectorXd r(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) r(static_cast<Eigen::Index>(c)) = at(k, c);
    return r;
}

std::size_t GridPath::index_of(double t) const {
    const std::size_t k = on_grid(t, dt);
    if (k >= points()) throw std::invalid_argument("time " + format_double(t) + " outside the grid");
    return k;
}

GridPath GridPath::subsample(std::size_t stride) const {
    if (stride == 0 || (points() - 1) % stride != 0)
        throw std::invalid_argument("subsample stride must divide the number of grid cells");
    GridPath out;
    out.dt = dt * static_cast<double>(stride);
    out.dim = dim;
    for (std::size_t k = 0; k < points(); k += stride)
        for (std::size_t c = 0; c < dim; ++c) out.values.push_back(at(k, c));
    return out;
}

CsvTable GridPath::to_csv() const {
    std::vector<std::string> header{"t"};
    for (std::size_t c = 0; c < dim; ++c) header.push_back("x" + std::to_string(c));
    CsvTable table(header);
    for (std::size_t k = 0; k < points(); ++k) {
        std::vector<CsvCell> row{time(k)};
        for (std::size_t c = 0; c < dim; ++c) row.emplace_back(at(k, c));
        table.add_row(std::move(row));
    }
    return table;
}

std::vector<double> sample_bridge_grid(std::size_t grid, const StreamKey& key) {
    if (grid < 2) throw std::invalid_argument("bridge grid needs m >= 2");
    std::size_t coarse = grid;
    std::size_t stride = 1;
    while (coarse % 2 == 0) {
        coarse /= 2;
        stride *= 2;
    }
    Rng rng = key.rng();
    std::normal_distribution<double> n01;
    std::vector<double> b(grid + 1, 0.0);
    const double m = static_cast<double>(grid);
    // Sequential conditioning on the coarse grid {k / coarse}.
    for (std::size_t k = 0; k + 1 < coarse; ++k) {
        const double t0 = static_cast<double>(k) / static_cast<double>(coarse);
        const double t1 = static_cast<double>(k + 1) / static_cast<double>(coarse);
        const double mean = b[k * stride] * (1.0 - t1) / (1.0 - t0);
        const double var = (t1 - t0) * (1.0 - t1) / (1.0 - t0);
        b[(k + 1) * stride] = mean + std::sqrt(var) * n01(rng);
    }
    // Midpoint refinement, coarse to fine, left to right.
    for (std::size_t s = stride; s > 1; s /= 2) {
        const double sd = std::sqrt(static_cast<double>(s) / m / 4.0);
        for (std::size_t a = 0; a < grid; a += s) b[a + s / 2] = 0.5 * (b[a] + b[a + s]) + sd * n01(rng);
    }
    return b;
}

NamedEpochStream::NamedEpochStream(NamedScheme scheme, std::size_t grid, std::size_t dim, StreamKey key)
    : scheme_(scheme), grid_(grid), dim_(dim), key_(key), current_((grid + 1) * dim, 0.0) {
    if (grid < 2) throw std::invalid_argument("bridge grid needs m >= 2");
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
}

void NamedEpochStream::fresh(std::size_t epoch) {
    for (std::size_t c = 0; c < dim_; ++c) {
        const auto b = sample_bridge_grid(grid_, key_.child(static_cast<std::uint64_t>(epoch)).child(static_cast<std::uint64_t>(c)));
        for (std::size_t k = 0; k <= grid_; ++k) current_[k * dim_ + c] = b[k];
    }
}

void NamedEpochStream::reflect() {
    std::vector<double> next(current_.size());
    for (std::size_t k = 0; k <= grid_; ++k)
        for (std::size_t c = 0; c < dim_; ++c) next[k * dim_ + c] = -current_[(grid_ - k) * dim_ + c];
    current_ = std::move(next);
}

const std::vector<double>& NamedEpochStream::next() {
    const std::size_t j = emitted_++;
    switch (scheme_) {
        case NamedScheme::single_shuffle:
            if (j == 0) fresh(0);
            break;
        case NamedScheme::random_reshuffle: fresh(j); break;
        case NamedScheme::flipflop_single:
            if (j == 0) fresh(0);
            else reflect();
            break;
        case NamedScheme::flipflop_random:
            if (j % 2 == 0) fresh(j);
            else reflect();
            break;
    }
    return current_;
}

BridgeSampler::BridgeSampler(BridgeFamilySpec spec) : spec_(std::move(spec)) {
    if (spec_.grid < 2) throw std::invalid_argument("bridge grid needs m >= 2");
    if (spec_.epochs == 0) throw std::invalid_argument("bridge family needs at least one epoch");
    const auto* cop = std::get_if<perm::Copula>(&spec_.scheme);
    if (!cop) return;
    if (auto md = cop->max_dim(); md && spec_.epochs > *md)
        throw std::invalid_argument(cop->name() + " supports at most " + std::to_string(*md) + " epochs");
    const std::size_t m = spec_.grid;
    const std::size_t n = spec_.epochs * (m - 1);
    if (n > kMaxDenseDim) throw std::invalid_argument("dense bridge covariance too large (" + std::to_string(n) + " variables)");
    MatrixXd cov(n, n);
    for (std::size_t i = 0; i < spec_.epochs; ++i)
        for (std::size_t a = 1; a < m; ++a)
            for (std::size_t j = 0; j < spec_.epochs; ++j)
                for (std::size_t b = 1; b < m; ++b) {
                    const double s = static_cast<double>(a) / static_cast<double>(m);
                    const double t = static_cast<double>(b) / static_cast<double>(m);
                    cov(i * (m - 1) + a - 1, j * (m - 1) + b - 1) = bridge_covariance(spec_, i, j, s, t);
                }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericError("bridge covariance eigendecomposition failed");
    VectorXd lam = es.eigenvalues();
    min_eig_ = lam.minCoeff();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        if (lam(k) < 0.0) {
            if (lam(k) < -1e-10 * scale)
                throw NumericError("copula " + cop->name() + " yields a non-PSD bridge covariance (eigenvalue " +
                                   format_double(lam(k)) + ")");
            lam(k) = 0.0;
        }
    }
    factor_ = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

GridPath BridgeSampler::sample(std::size_t dim, Rng& rng) const {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    const std::size_t m = spec_.grid;
    const std::size_t epochs = spec_.epochs;
    GridPath out;
    out.dt = 1.0 / static_cast<double>(m);
    out.dim = dim;
    out.values.assign((epochs * m + 1) * dim, 0.0);
    if (const auto* named = std::get_if<NamedScheme>(&spec_.scheme)) {
        NamedEpochStream stream(*named, m, dim, StreamKey(rng()));
        for (std::size_t j = 0; j < epochs; ++j) {
            const auto& ep = stream.next();
            for (std::size_t k = 0; k <= m; ++k)
                for (std::size_t c = 0; c < dim; ++c) out.values[(j * m + k) * dim + c] = ep[k * dim + c];
        }
        return out;
    }
    std::normal_distribution<double> n01;
    const Eigen::Index n = factor_.cols();
    VectorXd z(n);
    for (std::size_t c = 0; c < dim; ++c) {
        for (Eigen::Index k = 0; k < n; ++k) z(k) = n01(rng);
        const VectorXd x = factor_ * z;
        for (std::size_t j = 0; j < epochs; ++j)
            for (std::size_t a = 1; a < m; ++a)
                out.values[(j * m + a) * dim + c] = x(static_cast<Eigen::Index>(j * (m - 1) + a - 1));
    }
    return out;
}

GridPath sample_epoched_bridge(const BridgeFamilySpec& spec, std::size_t dim, Rng& rng) {
    return BridgeSampler(spec).sample(dim, rng);
}

VectorXd EpochedPath::w_at_epoch_end(std::size_t j) const { return w.row((j + 1) * grid); }

EpochedPath assemble_ebm(const GridPath& bridge, double T, const VectorXd& v) {
    if (!(T > 0.0)) throw std::invalid_argument("period T must be positive");
    if (v.size() != static_cast<Eigen::Index>(bridge.dim)) throw std::invalid_argument("V has the wrong dimension");
    const double m_real = 1.0 / bridge.dt;
    const auto m = static_cast<std::size_t>(std::llround(m_real));
    if (m < 1 || (bridge.points() - 1) % m != 0) throw std::invalid_argument("bridge grid does not cover whole epochs");
    EpochedPath p;
    p.period = T;
    p.grid = m;
    p.epochs = (bridge.points() - 1) / m;
    p.bridge = bridge;
    p.v = v;
    p.w.dt = T / static_cast<double>(m);
    p.w.dim = bridge.dim;
    p.w.values.resize(bridge.values.size());
    const double rt = std::sqrt(T);
    for (std::size_t k = 0; k < bridge.points(); ++k) {
        // t / sqrt(T) with t = k T / m, written to keep W at epoch ends an exact multiple.
        const double lin = rt * (static_cast<double>(k) / static_cast<double>(m));
        for (std::size_t c = 0; c < bridge.dim; ++c)
            p.w.values[k * bridge.dim + c] = rt * bridge.at(k, c) + lin * v(static_cast<Eigen::Index>(c));
    }
    return p;
}

EpochedPath assemble_ebm(const GridPath& bridge, double T, Rng& rng) {
    std::normal_distribution<double> n01;
    VectorXd v(static_cast<Eigen::Index>(bridge.dim));
    for (Eigen::Index c = 0; c < v.size(); ++c) v(c) = n01(rng);
    return assemble_ebm(bridge, T, v);
}

CrossCovariance empirical_cross_covariance(const std::vector<GridPath>& paths, std::size_t i, std::size_t j,
                                           std::span<const double> s, std::span<const double> t, std::size_t component) {
    if (paths.size() < 2) throw std::invalid_argument("cross covariance needs at least two replicas");
    const std::size_t m_count = paths.size();
    CrossCovariance out;
    out.s.assign(s.begin(), s.end());
    out.t.assign(t.begin(), t.end());
    out.replicas = m_count;
    std::vector<double> x(m_count), y(m_count);
    for (double sv : s) {
        for (double tv : t) {
            for (std::size_t r = 0; r < m_count; ++r) {
                const auto& p = paths[r];
                if (component >= p.dim) throw std::invalid_argument("component out of range");
                x[r] = p.at(p.index_of(static_cast<double>(i) + sv), component);
                y[r] = p.at(p.index_of(static_cast<double>(j) + tv), component);
            }
            const auto est = sample_covariance(x, y);
            out.estimate.push_back(est.cov);
            out.std_error.push_back(est.std_error);
        }
    }
    return out;
}

}  // namespace smelab::noise
