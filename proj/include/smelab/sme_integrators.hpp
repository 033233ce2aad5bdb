#pragma once

#include <string>
#include <vector>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/core/rng.hpp"
#include "smelab/risk_models.hpp"

namespace smelab::sme {

enum class SmeKind { GF, CC, NCC, SGF2 };

std::string to_string(SmeKind kind);
SmeKind sme_kind_from_string(const std::string& name);

struct NoiseParams {
    double b_eq = 1.0;
    double sigma_eps = 1.0;
    std::size_t batch = 1;
    double h = 0.1;
};

/**
 * Stochastic modified equation dX = b(X) dt + D(X)^{1/2} dW for the quadratic
 * objective, with Sigma = (h/B) S and S(theta) = 2 B^Eq kappa e e^T kappa + sigma^2 kappa.
 *   GF: drift -kappa e, no noise;  CC: noise frozen at theta*;
 *   NCC: state-dependent noise;    SGF2: drift -kappa (I + h kappa / 2) e, state-dependent noise.
 */
class SmeSpec {
public:
    SmeSpec(SmeKind kind, risk::QuadraticObjective objective, NoiseParams noise);

    [[nodiscard]] SmeKind kind() const { return kind_; }
    [[nodiscard]] const risk::QuadraticObjective& objective() const { return q_; }
    [[nodiscard]] const NoiseParams& noise() const { return noise_; }
    [[nodiscard]] Eigen::Index dim() const { return q_.dim(); }

    [[nodiscard]] VectorXd drift(const VectorXd& theta) const;
    // sqrt(h/B) * sqrt(S(theta)) per kind (zero for GF).
    [[nodiscard]] MatrixXd diffusion(const VectorXd& theta) const;

private:
    SmeKind kind_;
    risk::QuadraticObjective q_;
    NoiseParams noise_;
    risk::LinRegModel noise_model_;
    MatrixXd frozen_;
};

struct SdePath {
    std::vector<double> times;
    std::vector<VectorXd> values;
    double dt = 0.0;

    [[nodiscard]] CsvTable to_csv() const;
};

// e^{-t kappa}(theta0 - theta*) + theta*.
VectorXd gradient_flow_exact(const risk::QuadraticObjective& q, const VectorXd& theta0, double t);

// -kappa (I + h kappa / 2)(theta - theta*).
VectorXd second_order_drift(const risk::QuadraticObjective& q, double h, const VectorXd& theta);

// Default integration step when approximating SGD with step h.
inline double default_dt(double h) { return h / 50.0; }

/**
 * Explicit Euler-Maruyama on the uniform grid with ceil(T/dt) steps (step <= dt).
 * Throws NumericError when the state becomes non-finite or exceeds 1e12 in norm.
 */
SdePath euler_maruyama(const SmeSpec& spec, const VectorXd& theta0, double T, double dt, Rng& rng);

// Terminal value of euler_maruyama; same stream consumption, scalar fast path for d = 1.
VectorXd euler_maruyama_final(const SmeSpec& spec, const VectorXd& theta0, double T, double dt, Rng& rng);

// Exact draw of X^CC_t for d = 1: X^0_t + sqrt(h sigma^2 / (2B)) W_{1 - e^{-2 kappa t}}.
double cc_exact_sample_1d(const SmeSpec& spec, double theta0, double t, Rng& rng);

struct ScalarParams {
    double kappa = 1.0;
    double sigma_eps = 1.0;
    std::size_t batch = 1;
    double kurtosis = 3.0;
};

// zeta^h = 1 - (h / 2B) kappa (Kurt - 1).
double zeta(const ScalarParams& p, double h);
// xi^h = zeta^h + h kappa / 2.
double xi(const ScalarParams& p, double h);

/**
 * E[1/2 (Y_t - theta*)^2] for d = 1 with Re0 = 1/2 (theta0 - theta*)^2 (unweighted by kappa).
 * Throws NumericError when zeta^h (NCC) or xi^h (SGF2) is not positive.
 */
double expected_excess_risk(SmeKind kind, const ScalarParams& p, double h, double t, double re0);

}  // namespace smelab::sme
