#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smelab/core/csv.hpp"
#include "smelab/core/linalg.hpp"
#include "smelab/core/stats.hpp"
#include "smelab/risk_models.hpp"
#include "smelab/sme_integrators.hpp"

namespace smelab::analysis {

/**
 * Coefficients of h in the weak-error expansion of SGD against GF, CC and NCC
 * at horizon T for R = 1/2 <kappa, e^{(x)2}>:
 *   a = T/2 <kappa^3 e^{-2T kappa}, e e^T>,  b = 2 a B^Eq,  c = sigma^2/4 <kappa, I - e^{-2 kappa T}>,
 *   LE(NCC) = -a,  LE(CC) = -a + b/B,  LE(GF) = -a + (b + c)/B,  B^GF = (2b + c)/(2a).
 */
struct LinearErrorReport {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double le_ncc = 0.0;
    double le_cc = 0.0;
    double le_gf = 0.0;
    double b_eq = 0.0;
    std::optional<double> b_gf;  // undefined when a = 0
    double batch = 1.0;
    double horizon = 0.0;
};

LinearErrorReport linear_error_terms(const risk::QuadraticObjective& q, const VectorXd& theta0, double T,
                                     double batch, double b_eq, double sigma_eps);

// B^GF = 2 B^Eq + sigma^2 <kappa, I - e^{-2T kappa}> / (4T <kappa^3 e^{-2T kappa}, e e^T>).
std::optional<double> b_gf_direct(const risk::QuadraticObjective& q, const VectorXd& theta0, double T, double b_eq,
                                  double sigma_eps);

using DiffusionMatrix = std::function<MatrixXd(const VectorXd&)>;

/**
 * Linear error term for an SME with drift -grad R and diffusion matrix D along the flow:
 *   LE = 1/2 int_0^T <kappa e^{-2(T-t) kappa}, (Sigma - D)(X^0_t)> dt - T/2 <kappa^3 e^{-2T kappa}, e e^T>,
 * Sigma = S / B; composite Simpson rule.
 */
double linear_error_quadrature(const risk::QuadraticObjective& q, const VectorXd& theta0, double T, double batch,
                               double b_eq, double sigma_eps, const DiffusionMatrix& d, std::size_t panels = 1024);

// D for the named kinds (GF: 0, CC: Sigma(theta*), NCC: Sigma).
DiffusionMatrix diffusion_matrix(sme::SmeKind kind, const risk::QuadraticObjective& q, double batch, double b_eq,
                                 double sigma_eps);

enum class Approx { GF, CC, NCC };
std::string to_string(Approx a);

enum class Regime {
    i,
    ii,
    iii,
    boundary_iii_iv,  // B = B^GF - B^Eq: GF ~ NCC
    iv,
    boundary_iv_v,    // B = B^GF: GF ~ CC
    v,
    degenerate_gf_worst,  // B^Eq = 0, B < B^GF
    degenerate_tie,       // B^Eq = 0, B = B^GF
    degenerate_gf_best,   // B^Eq = 0, B > B^GF
    undefined             // a = 0
};
std::string to_string(Regime r);

struct RegimeClassification {
    Regime regime = Regime::undefined;
    // Groups of approximations from worst (largest |LE|) to best; members of a group tie.
    std::vector<std::vector<Approx>> ordering;
    // Additional exact statements: "LE(CC)=0" at B = 2 B^Eq, "LE(GF)=0" at B = 2 (B^GF - B^Eq).
    std::vector<std::string> flags;

    [[nodiscard]] std::string ordering_text() const;
};

inline constexpr double kTieTolerance = 1e-9;

RegimeClassification classify_regime(double batch, const LinearErrorReport& report);

// The ordering a regime asserts (worst to best).
std::vector<std::vector<Approx>> regime_ordering(Regime r);

// Ordering from |LE| values with relative tie tolerance.
std::vector<std::vector<Approx>> ordering_from_le(const LinearErrorReport& report, double tol = kTieTolerance);

nlohmann::json regime_json(const LinearErrorReport& report, const RegimeClassification& cls);

struct SgdRiskEstimate {
    double h = 0.0;
    std::size_t steps = 0;
    MeanEstimate excess;  // of 1/2 (chi - theta*)^2
};

/**
 * Monte Carlo estimate of E[1/2 (chi_{T/h} - theta*)^2] for d = 1 mini-batch SGD with fresh
 * data per replica. Replica r at step size h uses stream seed / "weak-error" / bits(h) / r.
 */
std::vector<SgdRiskEstimate> estimate_sgd_excess_risk(const risk::LinRegModel& model, std::size_t batch, double T,
                                                      double theta0, const std::vector<double>& h_list,
                                                      std::size_t replicas, std::uint64_t seed, unsigned threads = 0);

struct WeakErrorPoint {
    double h = 0.0;
    std::size_t steps = 0;
    std::size_t replicas = 0;
    double sgd_mean = 0.0;
    double closed_form = 0.0;
    double signed_error = 0.0;  // sgd_mean - closed_form
    double weak_error = 0.0;    // |signed_error|
    double std_error = 0.0;
    bool valid = true;          // false when the closed form is undefined at this h
    std::string note;
};

/** Weak errors (1/kappa) |E R(chi_{T/h}) - E R(Y_T)| = |E Re(chi) - E Re(Y_T)| with Re = 1/2 e^2. */
struct WeakErrorCurve {
    sme::SmeKind kind = sme::SmeKind::GF;
    std::size_t batch = 1;
    double horizon = 0.0;
    bool divided_by_kappa = true;
    std::vector<WeakErrorPoint> points;
};

// Throws std::invalid_argument when some h does not divide T.
std::size_t steps_for(double T, double h);

WeakErrorCurve weak_error_from_estimates(const risk::LinRegModel& model, sme::SmeKind kind, std::size_t batch, double T,
                                         double theta0, const std::vector<SgdRiskEstimate>& estimates);

WeakErrorCurve weak_error_curve(const risk::LinRegModel& model, sme::SmeKind kind, std::size_t batch, double T,
                                double theta0, const std::vector<double>& h_list, std::size_t replicas,
                                std::uint64_t seed, unsigned threads = 0);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t used = 0;
    std::vector<std::string> warnings;
};

// Least squares of log error on log h; nonpositive or invalid points are dropped with a warning.
SlopeFit slope_fit(const std::vector<double>& h, const std::vector<double>& errors);
SlopeFit slope_fit(const WeakErrorCurve& curve);

// Columns setting_id, kind, h, weak_error, stderr, M.
void append_weak_error_rows(CsvTable& table, const std::string& setting_id, const WeakErrorCurve& curve);
CsvTable weak_error_table();

}  // namespace smelab::analysis
