#include "smelab/sgd_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace smelab::sgd {

namespace {

void check_step(double h) {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("step size h must lie in (0, 1)");
}

void check_batch(std::size_t batch) {
    if (batch == 0) throw std::invalid_argument("batch size must be >= 1");
}

perm::Permutation uniform_permutation(std::size_t n, Rng& rng) {
    perm::Permutation p = perm::identity(n);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

Trajectory start(const VectorXd& theta0, double h, std::size_t steps) {
    Trajectory tr;
    tr.h = h;
    tr.steps.reserve(steps + 1);
    tr.times.reserve(steps + 1);
    tr.params.reserve(steps + 1);
    tr.steps.push_back(0);
    tr.times.push_back(0.0);
    tr.params.push_back(theta0);
    return tr;
}

void record(Trajectory& tr, std::size_t n, const VectorXd& theta) {
    tr.steps.push_back(n);
    tr.times.push_back(static_cast<double>(n) * tr.h);
    tr.params.push_back(theta);
}

// Adds (<theta, x> - y) x to g.
inline void accumulate_gradient(const VectorXd& theta, const VectorXd& x, double y, VectorXd& g) {
    g.noalias() += (theta.dot(x) - y) * x;
}

}  // namespace

Schedule Schedule::constant() { return Schedule(Kind::constant, 0.0, 0.0); }

Schedule Schedule::polynomial(double c, double beta) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("schedule rate c must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("schedule exponent beta must lie in (0, 1)");
    return Schedule(Kind::polynomial, c, beta);
}

double Schedule::operator()(double t) const {
    if (kind_ == Kind::constant) return 1.0;
    return std::pow(1.0 + c_ * t, -beta_);
}

double Schedule::integral(double t) const {
    if (kind_ == Kind::constant) return t;
    return (std::pow(1.0 + c_ * t, 1.0 - beta_) - 1.0) / (c_ * (1.0 - beta_));
}

Schedule Schedule::time_scaled(double scale) const {
    if (kind_ == Kind::constant) return *this;
    return polynomial(c_ * scale, beta_);
}

std::string to_string(ShuffleKind kind) {
    switch (kind) {
        case ShuffleKind::single_shuffle: return "single_shuffle";
        case ShuffleKind::random_reshuffle: return "random_reshuffle";
        case ShuffleKind::flipflop_single: return "flipflop_single";
        case ShuffleKind::flipflop_random: return "flipflop_random";
        case ShuffleKind::permuton_driven: return "permuton_driven";
        case ShuffleKind::explicit_list: return "explicit";
    }
    return "unknown";
}

ShuffleKind shuffle_kind_from_string(const std::string& name) {
    if (name == "single_shuffle" || name == "SS") return ShuffleKind::single_shuffle;
    if (name == "random_reshuffle" || name == "RR") return ShuffleKind::random_reshuffle;
    if (name == "flipflop_single") return ShuffleKind::flipflop_single;
    if (name == "flipflop_random") return ShuffleKind::flipflop_random;
    if (name == "permuton_driven") return ShuffleKind::permuton_driven;
    if (name == "explicit") return ShuffleKind::explicit_list;
    throw std::invalid_argument("unknown shuffling scheme: " + name);
}

ShufflingScheme ShufflingScheme::named(ShuffleKind kind) {
    if (kind == ShuffleKind::permuton_driven || kind == ShuffleKind::explicit_list)
        throw std::invalid_argument("named(): use permuton() or explicit_list()");
    ShufflingScheme s;
    s.kind = kind;
    return s;
}

ShufflingScheme ShufflingScheme::permuton(perm::Copula copula) {
    ShufflingScheme s;
    s.kind = ShuffleKind::permuton_driven;
    s.copula = std::move(copula);
    return s;
}

ShufflingScheme ShufflingScheme::explicit_list(std::vector<perm::Permutation> perms) {
    for (const auto& p : perms)
        if (!perm::is_permutation(p)) throw std::invalid_argument("explicit scheme contains a non-permutation");
    ShufflingScheme s;
    s.kind = ShuffleKind::explicit_list;
    s.explicit_perms = std::move(perms);
    return s;
}

std::vector<perm::Permutation> make_permutation_sequence(const ShufflingScheme& scheme, std::size_t n,
                                                         std::size_t epochs, Rng& rng) {
    if (n == 0) throw std::invalid_argument("make_permutation_sequence: N must be >= 1");
    std::vector<perm::Permutation> out;
    out.reserve(epochs);
    const perm::Permutation rev = perm::reversal(n);
    switch (scheme.kind) {
        case ShuffleKind::single_shuffle:
            out.assign(epochs, perm::identity(n));
            break;
        case ShuffleKind::random_reshuffle:
            for (std::size_t j = 0; j < epochs; ++j) out.push_back(j == 0 ? perm::identity(n) : uniform_permutation(n, rng));
            break;
        case ShuffleKind::flipflop_single:
            for (std::size_t j = 0; j < epochs; ++j) out.push_back(j % 2 == 0 ? perm::identity(n) : rev);
            break;
        case ShuffleKind::flipflop_random:
            for (std::size_t j = 0; j < epochs; ++j) {
                if (j % 2 == 1) out.push_back(perm::compose(out.back(), rev));
                else out.push_back(j == 0 ? perm::identity(n) : uniform_permutation(n, rng));
            }
            break;
        case ShuffleKind::permuton_driven: {
            if (!scheme.copula) throw std::invalid_argument("permuton-driven scheme needs a copula");
            if (epochs == 0) break;
            const auto sigma = perm::sample_jpermutation(*scheme.copula, n, epochs, rng);
            // Walk order is the inverse of the ranks; relabel data so that epoch 0 is the identity.
            const perm::Permutation& relabel = sigma.perms[0];
            for (std::size_t j = 0; j < epochs; ++j) out.push_back(perm::compose(relabel, perm::inverse(sigma.perms[j])));
            break;
        }
        case ShuffleKind::explicit_list:
            if (scheme.explicit_perms.size() < epochs)
                throw std::invalid_argument("explicit scheme lists fewer permutations than epochs");
            for (std::size_t j = 0; j < epochs; ++j) {
                if (scheme.explicit_perms[j].size() != n)
                    throw std::invalid_argument("explicit scheme permutation has the wrong size");
                out.push_back(scheme.explicit_perms[j]);
            }
            break;
    }
    return out;
}

CsvTable Trajectory::to_csv() const {
    const Eigen::Index d = params.empty() ? 0 : params.front().size();
    std::vector<std::string> header{"step", "t"};
    for (Eigen::Index i = 0; i < d; ++i) header.push_back("theta" + std::to_string(i));
    CsvTable table(header);
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::vector<CsvCell> row{static_cast<std::uint64_t>(steps[k]), times[k]};
        for (Eigen::Index i = 0; i < d; ++i) row.emplace_back(params[k](i));
        table.add_row(std::move(row));
    }
    return table;
}

namespace {

template <class Draw>
Trajectory replacement_loop(const VectorXd& theta0, double h, std::size_t batch, const Schedule& u,
                            std::size_t steps, bool keep_path, Draw&& draw) {
    check_step(h);
    check_batch(batch);
    Trajectory tr = keep_path ? start(theta0, h, steps) : Trajectory{};
    VectorXd theta = theta0;
    VectorXd x(theta0.size());
    VectorXd g(theta0.size());
    double y = 0.0;
    const double scale = h / static_cast<double>(batch);
    for (std::size_t n = 0; n < steps; ++n) {
        g.setZero();
        for (std::size_t k = 0; k < batch; ++k) {
            draw(n, k, x, y);
            accumulate_gradient(theta, x, y, g);
        }
        theta -= (u(static_cast<double>(n) * h) * scale) * g;
        if (keep_path) record(tr, n + 1, theta);
    }
    if (!keep_path) tr.params.push_back(theta);
    return tr;
}

}  // namespace

Trajectory run_sgd_replacement(const risk::LinRegModel& model, const VectorXd& theta0, double h, std::size_t batch,
                               const Schedule& u, std::size_t steps, Rng& rng, SgdOptions options) {
    if (theta0.size() != model.dim()) throw std::invalid_argument("run_sgd_replacement: dimension mismatch");
    std::vector<risk::DataPoint> log;
    std::vector<std::vector<std::size_t>> batches;
    auto tr = replacement_loop(theta0, h, batch, u, steps, true, [&](std::size_t n, std::size_t k, VectorXd& x, double& y) {
        risk::sample_point_into(model, rng, x, y);
        if (options.log_batches) {
            if (k == 0) batches.emplace_back();
            batches.back().push_back(n * batch + k);
            log.push_back({x, y});
        }
    });
    tr.batch_log = std::move(batches);
    tr.data = std::move(log);
    tr.meta = {{"variant", "replacement"}, {"h", h}, {"batch", batch}, {"steps", steps}};
    return tr;
}

VectorXd sgd_replacement_final(const risk::LinRegModel& model, const VectorXd& theta0, double h, std::size_t batch,
                               const Schedule& u, std::size_t steps, Rng& rng) {
    if (theta0.size() != model.dim()) throw std::invalid_argument("sgd_replacement_final: dimension mismatch");
    auto tr = replacement_loop(theta0, h, batch, u, steps, false, [&](std::size_t, std::size_t, VectorXd& x, double& y) {
        risk::sample_point_into(model, rng, x, y);
    });
    return tr.params.back();
}

Trajectory run_sgd_finite(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                          std::size_t batch, const Schedule& u, std::size_t steps, Rng& rng, SgdOptions options) {
    if (dataset.empty()) throw std::invalid_argument("run_sgd_finite: empty dataset");
    std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
    std::vector<std::vector<std::size_t>> batches;
    auto tr = replacement_loop(theta0, h, batch, u, steps, true, [&](std::size_t, std::size_t k, VectorXd& x, double& y) {
        const std::size_t i = pick(rng);
        x = dataset[i].x;
        y = dataset[i].y;
        if (options.log_batches) {
            if (k == 0) batches.emplace_back();
            batches.back().push_back(i);
        }
    });
    tr.batch_log = std::move(batches);
    tr.meta = {{"variant", "finite_replacement"}, {"h", h}, {"batch", batch}, {"steps", steps},
               {"dataset_size", dataset.size()}};
    return tr;
}

Trajectory run_sgdo_with(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                         const Schedule& u, const std::vector<perm::Permutation>& perms) {
    if (dataset.empty()) throw std::invalid_argument("run_sgdo: empty dataset");
    check_step(h);
    const std::size_t n = dataset.size();
    for (const auto& p : perms)
        if (p.size() != n || !perm::is_permutation(p))
            throw std::invalid_argument("run_sgdo: epoch permutation is not a bijection on the dataset");
    const std::size_t steps = perms.size() * n;
    Trajectory tr = start(theta0, h, steps);
    VectorXd theta = theta0;
    for (std::size_t step = 0; step < steps; ++step) {
        const auto& z = dataset[perms[step / n][step % n]];
        const double r = theta.dot(z.x) - z.y;
        theta -= (h * u(static_cast<double>(step) * h) * r) * z.x;
        record(tr, step + 1, theta);
    }
    tr.meta = {{"variant", "without_replacement"}, {"h", h}, {"epochs", perms.size()}, {"dataset_size", n}};
    return tr;
}

Trajectory run_sgdo(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h, const Schedule& u,
                    const ShufflingScheme& scheme, std::size_t epochs, Rng& rng) {
    if (dataset.empty()) throw std::invalid_argument("run_sgdo: empty dataset");
    auto perms = make_permutation_sequence(scheme, dataset.size(), epochs, rng);
    auto tr = run_sgdo_with(dataset, theta0, h, u, perms);
    tr.meta["scheme"] = to_string(scheme.kind);
    return tr;
}

Trajectory run_sgd_one_pass(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                            const Schedule& u) {
    return run_sgdo_with(dataset, theta0, h, u, {perm::identity(dataset.size())});
}

}  // namespace smelab::sgd
