#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/permutons.hpp"
#include "smelab/risk_models.hpp"

namespace smelab::sgd {

/** Learning-rate factor u_t: constant 1, or (1 + c t)^{-beta}. */
class Schedule {
public:
    enum class Kind { constant, polynomial };

    static Schedule constant();
    static Schedule polynomial(double c, double beta);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] double beta() const { return beta_; }

    [[nodiscard]] double operator()(double t) const;
    // U_t = int_0^t u_s ds.
    [[nodiscard]] double integral(double t) const;
    // The schedule t -> u_{t * scale}.
    [[nodiscard]] Schedule time_scaled(double scale) const;

private:
    Schedule(Kind kind, double c, double beta) : kind_(kind), c_(c), beta_(beta) {}
    Kind kind_;
    double c_;
    double beta_;
};

enum class ShuffleKind {
    single_shuffle,
    random_reshuffle,
    flipflop_single,
    flipflop_random,
    permuton_driven,
    explicit_list
};

std::string to_string(ShuffleKind kind);
ShuffleKind shuffle_kind_from_string(const std::string& name);

struct ShufflingScheme {
    ShuffleKind kind = ShuffleKind::single_shuffle;
    std::optional<perm::Copula> copula;
    std::vector<perm::Permutation> explicit_perms;

    static ShufflingScheme named(ShuffleKind kind);
    static ShufflingScheme permuton(perm::Copula copula);
    static ShufflingScheme explicit_list(std::vector<perm::Permutation> perms);
};

/**
 * Epoch permutations pi^0, ..., pi^{epochs-1} of {0, ..., N-1}. Step m of epoch j
 * visits data point pi^j(m). Flip-flop epochs visit the previous epoch's order
 * reversed (pi^{2j+1} = pi^{2j} o reversal).
 */
std::vector<perm::Permutation> make_permutation_sequence(const ShufflingScheme& scheme, std::size_t n,
                                                         std::size_t epochs, Rng& rng);

struct Trajectory {
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<VectorXd> params;
    double h = 0.0;
    nlohmann::json meta;
    // Per step, the indices of the data used; into `data` for population sampling.
    std::vector<std::vector<std::size_t>> batch_log;
    std::vector<risk::DataPoint> data;

    [[nodiscard]] CsvTable to_csv() const;
};

struct SgdOptions {
    bool log_batches = false;
};

// Mini-batch SGD with fresh population draws each step.
Trajectory run_sgd_replacement(const risk::LinRegModel& model, const VectorXd& theta0, double h, std::size_t batch,
                               const Schedule& u, std::size_t steps, Rng& rng, SgdOptions options = {});

// Final iterate of run_sgd_replacement without storing the path; consumes the stream identically.
VectorXd sgd_replacement_final(const risk::LinRegModel& model, const VectorXd& theta0, double h, std::size_t batch,
                               const Schedule& u, std::size_t steps, Rng& rng);

// Mini-batch SGD drawing uniformly with replacement from a fixed dataset.
Trajectory run_sgd_finite(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                          std::size_t batch, const Schedule& u, std::size_t steps, Rng& rng, SgdOptions options = {});

// One-pass SGD (batch 1) over the dataset in the given order.
Trajectory run_sgd_one_pass(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                            const Schedule& u);

// SGD without replacement: epochs * N steps, step n uses z(pi^{floor(n/N)}(n mod N)).
Trajectory run_sgdo(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h, const Schedule& u,
                    const ShufflingScheme& scheme, std::size_t epochs, Rng& rng);

// Same recursion with permutations supplied directly.
Trajectory run_sgdo_with(const std::vector<risk::DataPoint>& dataset, const VectorXd& theta0, double h,
                         const Schedule& u, const std::vector<perm::Permutation>& perms);

}  // namespace smelab::sgd
