#include "smelab/permutons.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace smelab::perm {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t floor_index(double n_times_t, std::size_t n) {
    if (!(n_times_t > 0.0)) return 0;
    const double f = std::floor(n_times_t);
    return f >= static_cast<double>(n) ? n : static_cast<std::size_t>(f);
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Coordinates of an index set, repeated indices merged by minimum.
std::map<std::size_t, double> collapse(std::span<const double> t, std::span<const std::size_t> index) {
    if (t.size() != index.size()) throw std::invalid_argument("copula eval: value/index length mismatch");
    std::map<std::size_t, double> out;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] >= 0.0 && t[k] <= 1.0)) throw std::invalid_argument("copula eval: coordinates must lie in [0,1]");
        auto [it, inserted] = out.emplace(index[k], t[k]);
        if (!inserted) it->second = std::min(it->second, t[k]);
    }
    return out;
}

double pair_lower(double a, double b) { return std::max(a + b - 1.0, 0.0); }

// Logarithmic series distribution P(V = k) = p^k / (-k log(1-p)), Kemp's LK algorithm.
std::uint64_t sample_log_series(double theta, Rng& rng) {
    std::uniform_real_distribution<double> unif;
    const double p = -std::expm1(-theta);
    const double v = unif(rng);
    if (v >= p) return 1;
    const double q = -std::expm1(-theta * unif(rng));
    if (v <= q * q) {
        const double k = std::floor(1.0 + std::log(v) / std::log(q));
        return k < 1.0 ? 1 : static_cast<std::uint64_t>(k);
    }
    return v <= q ? 2 : 1;
}

// Positive stable variable with Laplace transform exp(-s^alpha), alpha in (0, 1].
double sample_positive_stable(double alpha, Rng& rng) {
    if (alpha == 1.0) return 1.0;
    std::uniform_real_distribution<double> unif;
    double u;
    do {
        u = unif(rng);
    } while (u == 0.0);
    const double th = kPi * u;
    const double w = std::exponential_distribution<double>(1.0)(rng);
    const double a = std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha);
    const double b = std::pow(std::sin((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha);
    return a * b;
}

}  // namespace

bool is_permutation(std::span<const std::size_t> p) {
    std::vector<char> seen(p.size(), 0);
    for (std::size_t v : p) {
        if (v >= p.size() || seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

Permutation identity(std::size_t n) {
    Permutation p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
}

Permutation reversal(std::size_t n) {
    Permutation p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = n - 1 - k;
    return p;
}

Permutation inverse(std::span<const std::size_t> p) {
    if (!is_permutation(p)) throw std::invalid_argument("inverse: not a permutation");
    Permutation q(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) q[p[k]] = k;
    return q;
}

Permutation compose(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("compose: size mismatch");
    Permutation c(a.size());
    for (std::size_t k = 0; k < b.size(); ++k) c[k] = a[b[k]];
    return c;
}

std::vector<std::int64_t> to_one_based(std::span<const std::size_t> p) {
    std::vector<std::int64_t> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = static_cast<std::int64_t>(p[k]) + 1;
    return out;
}

Permutation from_one_based(std::span<const std::int64_t> p) {
    Permutation out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < 1) throw std::invalid_argument("one-line notation entries must be >= 1");
        out[k] = static_cast<std::size_t>(p[k] - 1);
    }
    if (!is_permutation(out)) throw std::invalid_argument("one-line notation is not a permutation");
    return out;
}

CsvTable permutations_csv(const std::vector<Permutation>& perms) {
    const std::size_t n = perms.empty() ? 0 : perms.front().size();
    std::vector<std::string> header;
    for (std::size_t k = 0; k < n; ++k) header.push_back("p" + std::to_string(k + 1));
    CsvTable table(header);
    for (const auto& p : perms) {
        if (p.size() != n) throw std::invalid_argument("permutations_csv: mixed sizes");
        std::vector<CsvCell> row;
        for (auto v : to_one_based(p)) row.emplace_back(v);
        table.add_row(std::move(row));
    }
    return table;
}

Permutation perm_of(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("perm_of: non-finite entry");
    std::vector<std::size_t> order = identity(v.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Permutation rank(v.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    return rank;
}

void JPermutation::validate() const {
    if (perms.empty()) throw std::invalid_argument("J-permutation needs at least one component");
    const std::size_t n = size();
    for (const auto& p : perms) {
        if (p.size() != n) throw std::invalid_argument("J-permutation components differ in size");
        if (!is_permutation(p)) throw std::invalid_argument("J-permutation component is not a bijection");
    }
}

JPermutation inverse(const JPermutation& tau) {
    JPermutation out;
    for (const auto& p : tau.perms) out.perms.push_back(inverse(p));
    return out;
}

std::string to_string(ArchimedeanFamily family) {
    switch (family) {
        case ArchimedeanFamily::clayton: return "clayton";
        case ArchimedeanFamily::gumbel: return "gumbel";
        case ArchimedeanFamily::frank: return "frank";
    }
    return "unknown";
}

ArchimedeanFamily family_from_string(const std::string& name) {
    if (name == "clayton") return ArchimedeanFamily::clayton;
    if (name == "gumbel") return ArchimedeanFamily::gumbel;
    if (name == "frank") return ArchimedeanFamily::frank;
    throw std::invalid_argument("unknown Archimedean family: " + name);
}

void check_theta(ArchimedeanFamily family, double theta) {
    const bool ok = family == ArchimedeanFamily::gumbel ? theta >= 1.0 : theta > 0.0;
    if (!ok || !std::isfinite(theta))
        throw std::invalid_argument("theta = " + std::to_string(theta) + " outside the valid range for " +
                                    to_string(family));
}

double archimedean_generator(ArchimedeanFamily family, double theta, GeneratorDirection direction, double x) {
    check_theta(family, theta);
    const bool inv = direction == GeneratorDirection::phi_inverse;
    if (inv && !(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("phi_inverse argument must lie in [0,1]");
    if (!inv && !(x >= 0.0)) throw std::invalid_argument("phi argument must be >= 0");
    const double inf = std::numeric_limits<double>::infinity();
    switch (family) {
        case ArchimedeanFamily::clayton:
            if (inv) return x == 0.0 ? inf : (std::pow(x, -theta) - 1.0) / theta;
            return std::isinf(x) ? 0.0 : std::pow(1.0 + theta * x, -1.0 / theta);
        case ArchimedeanFamily::gumbel:
            if (inv) return x == 0.0 ? inf : std::pow(-std::log(x), theta);
            return std::exp(-std::pow(x, 1.0 / theta));
        case ArchimedeanFamily::frank:
            if (inv) return x == 0.0 ? inf : -std::log(std::expm1(-theta * x) / std::expm1(-theta));
            return std::isinf(x) ? 0.0 : -std::log1p(std::expm1(-theta) * std::exp(-x)) / theta;
    }
    throw std::invalid_argument("unknown family");
}

std::string to_string(CopulaKind kind) {
    switch (kind) {
        case CopulaKind::comonotone: return "comonotone";
        case CopulaKind::independence: return "independence";
        case CopulaKind::countermonotone: return "countermonotone";
        case CopulaKind::flipflop_single: return "flipflop_single";
        case CopulaKind::flipflop_random: return "flipflop_random";
        case CopulaKind::archimedean: return "archimedean";
        case CopulaKind::finite: return "finite";
    }
    return "unknown";
}

Copula Copula::comonotone() { return Copula(CopulaKind::comonotone); }
Copula Copula::independence() { return Copula(CopulaKind::independence); }
Copula Copula::countermonotone() { return Copula(CopulaKind::countermonotone); }
Copula Copula::flipflop_single() { return Copula(CopulaKind::flipflop_single); }
Copula Copula::flipflop_random() { return Copula(CopulaKind::flipflop_random); }

Copula Copula::archimedean(ArchimedeanFamily family, double theta) {
    check_theta(family, theta);
    Copula c(CopulaKind::archimedean);
    c.family_ = family;
    c.theta_ = theta;
    return c;
}

Copula Copula::finite(JPermutation tau) {
    tau.validate();
    Copula c(CopulaKind::finite);
    c.tau_ = std::move(tau);
    return c;
}

std::optional<std::size_t> Copula::max_dim() const {
    if (kind_ == CopulaKind::countermonotone) return 2;
    if (kind_ == CopulaKind::finite) return tau_.components();
    return std::nullopt;
}

std::string Copula::name() const {
    if (kind_ == CopulaKind::archimedean) {
        return to_string(family_) + "(" + format_double(theta_) + ")";
    }
    return to_string(kind_);
}

void Copula::check_dim(std::size_t dims) const {
    if (auto m = max_dim(); m && dims > *m)
        throw std::invalid_argument(name() + " supports at most " + std::to_string(*m) + " coordinates");
}

double Copula::eval(std::span<const double> t, std::span<const std::size_t> index) const {
    const auto coords = collapse(t, index);
    if (coords.empty()) return 1.0;
    if (auto m = max_dim(); m && coords.rbegin()->first >= *m)
        throw std::invalid_argument(name() + ": coordinate index " + std::to_string(coords.rbegin()->first) +
                                    " out of range");
    switch (kind_) {
        case CopulaKind::comonotone: {
            double m = 1.0;
            for (const auto& [i, v] : coords) m = std::min(m, v);
            return m;
        }
        case CopulaKind::independence: {
            double p = 1.0;
            for (const auto& [i, v] : coords) p *= v;
            return p;
        }
        case CopulaKind::countermonotone: {
            if (coords.size() == 1) return coords.begin()->second;
            return pair_lower(coords.at(0), coords.at(1));
        }
        case CopulaKind::flipflop_single: {
            double me = 2.0, mo = 2.0;
            for (const auto& [i, v] : coords) {
                if (i % 2 == 0) me = std::min(me, v);
                else mo = std::min(mo, v);
            }
            if (me > 1.0) return mo;
            if (mo > 1.0) return me;
            return pair_lower(me, mo);
        }
        case CopulaKind::flipflop_random: {
            std::map<std::size_t, std::pair<double, double>> groups;
            for (const auto& [i, v] : coords) {
                auto& g = groups.try_emplace(i / 2, 2.0, 2.0).first->second;
                (i % 2 == 0 ? g.first : g.second) = v;
            }
            double p = 1.0;
            for (const auto& [g, ab] : groups) {
                if (ab.first > 1.0) p *= ab.second;
                else if (ab.second > 1.0) p *= ab.first;
                else p *= pair_lower(ab.first, ab.second);
            }
            return p;
        }
        case CopulaKind::archimedean: {
            double s = 0.0;
            for (const auto& [i, v] : coords)
                s += archimedean_generator(family_, theta_, GeneratorDirection::phi_inverse, v);
            return clamp01(archimedean_generator(family_, theta_, GeneratorDirection::phi, s));
        }
        case CopulaKind::finite: {
            const std::size_t n = tau_.size();
            const double nd = static_cast<double>(n);
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double prod = 1.0;
                for (const auto& [i, v] : coords) {
                    prod *= clamp01(nd * v - static_cast<double>(tau_.perms[i][k]));
                    if (prod == 0.0) break;
                }
                acc += prod;
            }
            return acc / nd;
        }
    }
    throw std::logic_error("unhandled copula kind");
}

double Copula::eval(std::span<const double> t) const {
    std::vector<std::size_t> index(t.size());
    std::iota(index.begin(), index.end(), std::size_t{0});
    return eval(t, index);
}

double Copula::eval_pair(std::size_t i, std::size_t j, double s, double t) const {
    const double v[2] = {s, t};
    const std::size_t idx[2] = {i, j};
    return eval(v, idx);
}

void Copula::sample(Rng& rng, std::span<double> out) const {
    check_dim(out.size());
    std::uniform_real_distribution<double> unif;
    switch (kind_) {
        case CopulaKind::comonotone: {
            const double u = unif(rng);
            std::fill(out.begin(), out.end(), u);
            return;
        }
        case CopulaKind::independence:
            for (double& x : out) x = unif(rng);
            return;
        case CopulaKind::countermonotone:
        case CopulaKind::flipflop_single: {
            const double u = unif(rng);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = j % 2 == 0 ? u : 1.0 - u;
            return;
        }
        case CopulaKind::flipflop_random: {
            double u = 0.0;
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (j % 2 == 0) u = unif(rng);
                out[j] = j % 2 == 0 ? u : 1.0 - u;
            }
            return;
        }
        case CopulaKind::archimedean: {
            // Marshall-Olkin: U_j = psi(E_j / V) with psi the Laplace transform of the frailty V.
            std::exponential_distribution<double> expo(1.0);
            switch (family_) {
                case ArchimedeanFamily::clayton: {
                    const double v = std::gamma_distribution<double>(1.0 / theta_, 1.0)(rng);
                    for (double& x : out) x = std::pow(1.0 + expo(rng) / v, -1.0 / theta_);
                    return;
                }
                case ArchimedeanFamily::gumbel: {
                    const double alpha = 1.0 / theta_;
                    const double v = sample_positive_stable(alpha, rng);
                    for (double& x : out) x = std::exp(-std::pow(expo(rng) / v, alpha));
                    return;
                }
                case ArchimedeanFamily::frank: {
                    const double v = static_cast<double>(sample_log_series(theta_, rng));
                    for (double& x : out)
                        x = archimedean_generator(family_, theta_, GeneratorDirection::phi, expo(rng) / v);
                    return;
                }
            }
            return;
        }
        case CopulaKind::finite: {
            const std::size_t n = tau_.size();
            const std::size_t k = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            for (std::size_t j = 0; j < out.size(); ++j)
                out[j] = (static_cast<double>(tau_.perms[j][k]) + unif(rng)) / static_cast<double>(n);
            return;
        }
    }
}

void reject_pairwise_family(const std::string& description) {
    throw std::invalid_argument("pairwise copula family '" + description +
                                "' has no joint sampler; compatibility of pairwise copulas cannot be verified");
}

JPermutation sample_jpermutation(const Copula& copula, std::size_t n, std::size_t j, Rng& rng) {
    if (n == 0 || j == 0) throw std::invalid_argument("sample_jpermutation: N and J must be positive");
    std::vector<double> rows(n * j);
    for (std::size_t k = 0; k < n; ++k) copula.sample(rng, std::span<double>(rows.data() + k * j, j));
    JPermutation out;
    std::vector<double> column(n);
    for (std::size_t c = 0; c < j; ++c) {
        for (std::size_t k = 0; k < n; ++k) column[k] = rows[k * j + c];
        out.perms.push_back(perm_of(column));
    }
    return out;
}

EmpiricalPermuton::EmpiricalPermuton(JPermutation source, EmpiricalMode mode)
    : tau_(std::move(source)), mode_(mode) {
    tau_.validate();
}

double EmpiricalPermuton::cdf(std::span<const double> t) const {
    const std::size_t jdim = tau_.components();
    if (t.size() != jdim) throw std::invalid_argument("EmpiricalPermuton::cdf: expected one coordinate per component");
    const std::size_t n = tau_.size();
    const double nd = static_cast<double>(n);
    double acc = 0.0;
    if (mode_ == EmpiricalMode::point_mass) {
        std::vector<std::size_t> lim(jdim);
        for (std::size_t j = 0; j < jdim; ++j) lim[j] = floor_index(nd * t[j], n);
        for (std::size_t k = 0; k < n; ++k) {
            bool in = true;
            for (std::size_t j = 0; j < jdim && in; ++j) in = tau_.perms[j][k] < lim[j];
            acc += in ? 1.0 : 0.0;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            double prod = 1.0;
            for (std::size_t j = 0; j < jdim && prod != 0.0; ++j)
                prod *= clamp01(nd * t[j] - static_cast<double>(tau_.perms[j][k]));
            acc += prod;
        }
    }
    return acc / nd;
}

double EmpiricalPermuton::cdf_pair(std::size_t i, std::size_t j, double s, double t) const {
    const std::size_t n = tau_.size();
    const double nd = static_cast<double>(n);
    const auto& x = tau_.perms.at(i);
    const auto& y = tau_.perms.at(j);
    double acc = 0.0;
    if (mode_ == EmpiricalMode::point_mass) {
        const std::size_t p = floor_index(nd * s, n), q = floor_index(nd * t, n);
        for (std::size_t k = 0; k < n; ++k) acc += (x[k] < p && y[k] < q) ? 1.0 : 0.0;
    } else {
        for (std::size_t k = 0; k < n; ++k)
            acc += clamp01(nd * s - static_cast<double>(x[k])) * clamp01(nd * t - static_cast<double>(y[k]));
    }
    return acc / nd;
}

std::vector<double> EmpiricalPermuton::grid_cdf_pair(std::size_t i, std::size_t j,
                                                     std::span<const double> grid) const {
    const std::size_t n = tau_.size();
    const double nd = static_cast<double>(n);
    const auto& x = tau_.perms.at(i);
    const auto& y = tau_.perms.at(j);
    const Permutation xinv = inverse(x);
    const Permutation yinv = inverse(y);
    const std::size_t g = grid.size();

    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

    // Fenwick tree over y-values of points inserted so far (those with x < p).
    std::vector<std::size_t> tree(n + 1, 0);
    auto add = [&](std::size_t pos) {
        for (std::size_t k = pos + 1; k <= n; k += k & (~k + 1)) ++tree[k];
    };
    auto prefix = [&](std::size_t q) {
        std::size_t s = 0;
        for (std::size_t k = q; k > 0; k -= k & (~k + 1)) s += tree[k];
        return s;
    };

    std::vector<double> out(g * g, 0.0);
    std::size_t inserted = 0;
    for (std::size_t a : order) {
        const double ns = nd * grid[a];
        const std::size_t p = floor_index(ns, n);
        while (inserted < p) add(y[xinv[inserted++]]);
        const double alpha = p < n ? std::max(ns - static_cast<double>(p), 0.0) : 0.0;
        for (std::size_t b = 0; b < g; ++b) {
            const double nt = nd * grid[b];
            const std::size_t q = floor_index(nt, n);
            double count = static_cast<double>(prefix(q));
            if (mode_ == EmpiricalMode::smoothed) {
                const double beta = q < n ? std::max(nt - static_cast<double>(q), 0.0) : 0.0;
                if (alpha > 0.0 && y[xinv[p]] < q) count += alpha;
                if (beta > 0.0 && x[yinv[q]] < p) count += beta;
                if (alpha > 0.0 && beta > 0.0 && xinv[p] == yinv[q]) count += alpha * beta;
            }
            out[a * g + b] = count / nd;
        }
    }
    return out;
}

double prefix_intersection(const JPermutation& sigma, std::size_t i, std::size_t j, double s, double t) {
    const std::size_t n = sigma.size();
    const double nd = static_cast<double>(n);
    const auto& a = sigma.perms.at(i);
    const auto& b = sigma.perms.at(j);
    const std::size_t p = floor_index(nd * s, n), q = floor_index(nd * t, n);
    std::vector<char> mark(n, 0);
    for (std::size_t m = 0; m < p; ++m) mark[a[m]] = 1;
    std::size_t count = 0;
    for (std::size_t m = 0; m < q; ++m) count += mark[b[m]];
    return static_cast<double>(count) / nd;
}

std::vector<double> unit_grid(std::size_t resolution) {
    if (resolution == 0) throw std::invalid_argument("grid resolution must be positive");
    std::vector<double> g(resolution);
    for (std::size_t k = 0; k < resolution; ++k)
        g[k] = static_cast<double>(k + 1) / static_cast<double>(resolution);
    return g;
}

double ks_distance(const CdfFunction& f1, const CdfFunction& f2, std::size_t dims, std::size_t resolution) {
    if (dims == 0) throw std::invalid_argument("ks_distance: dims must be positive");
    const auto grid = unit_grid(resolution);
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> pt(dims);
    double best = 0.0;
    while (true) {
        for (std::size_t d = 0; d < dims; ++d) pt[d] = grid[idx[d]];
        best = std::max(best, std::abs(f1(pt) - f2(pt)));
        std::size_t d = 0;
        while (d < dims && ++idx[d] == resolution) idx[d++] = 0;
        if (d == dims) break;
    }
    return best;
}

double ks_distance_pair(const EmpiricalPermuton& p, std::size_t i, std::size_t j, const Copula& c,
                        std::size_t ci, std::size_t cj, std::size_t resolution) {
    const auto grid = unit_grid(resolution);
    const auto vals = p.grid_cdf_pair(i, j, grid);
    double best = 0.0;
    for (std::size_t a = 0; a < grid.size(); ++a)
        for (std::size_t b = 0; b < grid.size(); ++b)
            best = std::max(best, std::abs(vals[a * grid.size() + b] - c.eval_pair(ci, cj, grid[a], grid[b])));
    return best;
}

}  // namespace smelab::perm
