#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/epoched_noise.hpp"
#include "smelab/risk_models.hpp"
#include "smelab/sgd_engine.hpp"
#include "smelab/sme_integrators.hpp"

namespace smelab::young {

using VectorField = std::function<VectorXd(double, const VectorXd&)>;
using MatrixPath = std::function<MatrixXd(double)>;
using VectorPath = std::function<VectorXd(double)>;

/**
 * Left Riemann sum sum_k f(t_k) (X_{t_{k+1}} - X_{t_k}) over the driver cells in [s, t].
 * f(t) is a (d x dim) matrix. Throws when [s, t] is not covered by grid points.
 */
VectorXd young_integral(const MatrixPath& integrand, const noise::GridPath& driver, double s, double t);
// Scalar version on a shared grid: sum_{k=lo}^{hi-1} f[k] (x[k+1] - x[k]).
double young_integral(std::span<const double> f, std::span<const double> x, std::size_t lo, std::size_t hi);

/**
 * dY = u_t drift(t, Y) dt + u_t sigma dX with X a grid path.
 * lambda and lipschitz record the strong convexity / smoothness constants of the gradient.
 */
struct YdeProblem {
    VectorField drift;
    MatrixXd sigma;
    sgd::Schedule schedule = sgd::Schedule::constant();
    noise::GridPath driver;
    VectorXd y0;
    double lambda = 0.0;
    double lipschitz = 0.0;

    void validate() const;
};

/**
 * Explicit scheme on every stride-th driver point:
 * Y_{k+1} = Y_k + u_{t_k} drift(t_k, Y_k) dt + u_{t_k} sigma (X_{t_{k+1}} - X_{t_k}).
 * Throws NumericError when |Y| exceeds 1e12 or becomes non-finite.
 */
sme::SdePath solve_yde(const YdeProblem& p, std::size_t stride = 1);

/** dY = (A_t Y + b_t) dt + sigma_t dX with commuting A_t. */
struct LinearYde {
    MatrixPath a;
    // Exact int_0^t A when known; otherwise trapezoid on the driver grid.
    std::optional<MatrixPath> a_integral;
    VectorPath b;
    MatrixPath sigma;
    noise::GridPath driver;
    VectorXd y0;
};

/**
 * Variation of constants Y_t = phi_t (y0 + int phi_s^{-1} b_s ds + int phi_s^{-1} sigma_s dX_s),
 * phi_t = exp(int_0^t A). The dX integral is the left sum; the ds integral is the trapezoid rule.
 * Throws std::invalid_argument when A does not commute across grid times.
 */
sme::SdePath linear_yde_oracle(const LinearYde& p, std::size_t stride = 1);

// A_t = -u_t kappa, b_t = u_t kappa theta*, sigma_t = u_t sigma: the quadratic case in both forms.
YdeProblem quadratic_problem(const risk::QuadraticObjective& q, const MatrixXd& sigma, const sgd::Schedule& u,
                             noise::GridPath driver, VectorXd y0);
LinearYde quadratic_linear_yde(const risk::QuadraticObjective& q, const MatrixXd& sigma, const sgd::Schedule& u,
                               noise::GridPath driver, VectorXd y0);

// Solution y of grad(y) = target by the contraction y <- y - (grad(y) - target) / L.
VectorXd inverse_gradient(const std::function<VectorXd(const VectorXd&)>& grad, const VectorXd& target,
                          double lambda, double lipschitz, VectorXd start);

/** Gradient-driven problem dY = -u_t grad R(Y) dt + u_t sigma dW on an epoched Brownian motion. */
struct GradientYde {
    std::function<VectorXd(const VectorXd&)> gradient;
    double lambda = 0.0;
    double lipschitz = 0.0;
    MatrixXd sigma;
    sgd::Schedule schedule = sgd::Schedule::constant();
    VectorXd y0;
};

YdeProblem as_problem(const GradientYde& g, const noise::EpochedPath& w);

/**
 * Rescaling onto the bridge: Y~_s = T^{-1/2} sigma^{-1} (Y_{sT} - Y_inf), Y_inf = (grad R)^{-1}(sigma W_T / T),
 * solves dY~ = -u~_s sqrt(T) sigma^{-1} (grad R(sqrt(T) sigma Y~ + Y_inf) - grad R(Y_inf)) ds + u~_s dX_s,
 * u~_s = u_{sT}.
 */
struct BridgeForm {
    YdeProblem problem;
    double period = 1.0;
    MatrixXd sigma;
    MatrixXd sigma_inv;
    VectorXd y_inf;

    [[nodiscard]] VectorXd to_bridge(const VectorXd& y) const;
    [[nodiscard]] VectorXd from_bridge(const VectorXd& y_tilde) const;
    // Path on [0, J T] from a path on [0, J].
    [[nodiscard]] sme::SdePath from_bridge(const sme::SdePath& tilde) const;
    [[nodiscard]] sme::SdePath to_bridge(const sme::SdePath& path) const;
};

BridgeForm reduce_to_bridge_form(const GradientYde& g, const noise::EpochedPath& w);

// Max over dyadic lags 2^p (and the full epoch) of |x_{k+l} - x_k| / (l dt)^alpha within one epoch of a grid path.
double holder_seminorm(const noise::GridPath& path, std::size_t first, std::size_t last, double alpha);

struct SgdoSmeOptions {
    std::size_t n = 1000;
    double h = 1e-3;
    double beta = 0.75;
    double c = 1.0;
    noise::NamedScheme scheme = noise::NamedScheme::single_shuffle;
    std::size_t epochs = 10000;
    std::size_t grid = 256;  // solver/driver cells per epoch
    std::uint64_t seed = 0;
    std::optional<VectorXd> theta0;  // defaults to theta* - 1
    double burn_in = 100.0;
    double time_factor = 1.2;
    double alpha = 0.42;
};

struct RateReport {
    std::vector<double> times;
    std::vector<double> errors;
    std::vector<double> bound_sqrt_log;
    std::vector<double> bound_holder;
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t fitted_points = 0;
    double c_alpha = 0.0;  // NaN when the scheme has infinitely many distinct epochs
    double period = 1.0;
    double c = 1.0;
    VectorXd y_inf;
    VectorXd y_final;
    nlohmann::json meta;

    [[nodiscard]] CsvTable to_csv() const;
    [[nodiscard]] nlohmann::json summary() const;
};

// Y_inf = theta* + kappa^{-1} T^{-1} sigma W_T with sigma = sqrt(h) sigma_eps kappa^{1/2}, W_T = sqrt(T) V.
VectorXd quadratic_limit(const risk::LinRegModel& model, double period, const MatrixXd& sigma, const VectorXd& v);

// sqrt(h) sqrt(sigma_eps^2 kappa).
MatrixXd sgdo_sigma(const risk::LinRegModel& model, double h);

// The V draw used by sgdo_sme_experiment for this seed.
VectorXd sgdo_limit_v(std::uint64_t seed, Eigen::Index dim);

/**
 * Solves the SGDo modified equation over J epochs of period T = N h on a streamed
 * epoched Brownian motion and records |Y_t - Y_inf| at geometric epoch-end times.
 */
RateReport sgdo_sme_experiment(const risk::LinRegModel& model, const SgdoSmeOptions& options);

}  // namespace smelab::young
