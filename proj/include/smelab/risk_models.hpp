#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "smelab/core/linalg.hpp"
#include "smelab/core/rng.hpp"

namespace smelab::risk {

enum class ScalarLaw { gaussian, exponential, uniform, rademacher, lognormal };

std::string to_string(ScalarLaw law);
ScalarLaw scalar_law_from_string(std::string_view name);

// x ~ N(0, kappa).
struct GaussianFeatures {};

// x = kappa^{1/2} xi with xi having i.i.d. standardized components of the given law.
struct ScalarIidFeatures {
    ScalarLaw law = ScalarLaw::gaussian;
    double lognormal_sigma = 1.0;
};

// Only the noise constant is known; sampling is unavailable.
struct AbstractFeatures {
    double b_eq = 1.0;
};

using FeatureLaw = std::variant<GaussianFeatures, ScalarIidFeatures, AbstractFeatures>;

// Standardized fourth moment E[xi^4] of the law.
double kurtosis(ScalarLaw law, double lognormal_sigma = 1.0);

// One draw with mean 0 and variance 1.
double sample_standardized(const ScalarIidFeatures& law, Rng& rng);

struct DataPoint {
    VectorXd x;
    double y = 0.0;
};

/** R(theta) = 1/2 <kappa, (theta - theta*)^{(x)2}> + offset. */
class QuadraticObjective {
public:
    QuadraticObjective(MatrixXd kappa, VectorXd theta_star, double offset = 0.0);

    [[nodiscard]] Eigen::Index dim() const { return theta_star_.size(); }
    [[nodiscard]] const MatrixXd& kappa() const { return kappa_; }
    [[nodiscard]] const VectorXd& theta_star() const { return theta_star_; }
    [[nodiscard]] double offset() const { return offset_; }
    [[nodiscard]] double lambda_min() const { return lambda_min_; }
    [[nodiscard]] double lambda_max() const { return lambda_max_; }

    [[nodiscard]] double value(const VectorXd& theta) const;
    [[nodiscard]] double excess(const VectorXd& theta) const;
    [[nodiscard]] VectorXd gradient(const VectorXd& theta) const;
    [[nodiscard]] const MatrixXd& hessian() const { return kappa_; }

private:
    void check_dim(const VectorXd& theta) const;

    MatrixXd kappa_;
    VectorXd theta_star_;
    double offset_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
};

class LinRegModel {
public:
    LinRegModel(MatrixXd kappa, VectorXd theta_star, double sigma_eps, FeatureLaw law);

    static LinRegModel scalar(double kappa, double theta_star, double sigma_eps, FeatureLaw law);

    [[nodiscard]] Eigen::Index dim() const { return theta_star_.size(); }
    [[nodiscard]] const MatrixXd& kappa() const { return kappa_; }
    [[nodiscard]] const MatrixXd& kappa_sqrt() const { return kappa_sqrt_; }
    [[nodiscard]] const VectorXd& theta_star() const { return theta_star_; }
    [[nodiscard]] double sigma_eps() const { return sigma_eps_; }
    [[nodiscard]] const FeatureLaw& feature_law() const { return law_; }

    // Population risk as a quadratic objective with offset sigma_eps^2 / 2.
    [[nodiscard]] QuadraticObjective objective() const;

    // Kurtosis of the scalar feature law when d = 1 (Gaussian counts as 3).
    [[nodiscard]] std::optional<double> feature_kurtosis() const;

private:
    MatrixXd kappa_;
    MatrixXd kappa_sqrt_;
    VectorXd theta_star_;
    double sigma_eps_;
    FeatureLaw law_;
};

double population_risk(const LinRegModel& model, const VectorXd& theta);
double excess_risk(const LinRegModel& model, const VectorXd& theta);

// (<theta, x> - y) x
VectorXd point_gradient(const VectorXd& theta, const DataPoint& z);

// Noise constant B^Eq; throws std::invalid_argument when the law does not determine it.
double b_eq(const LinRegModel& model);

// S(theta) = 2 B^Eq kappa e e^T kappa + sigma_eps^2 kappa, e = theta - theta*.
MatrixXd gradient_covariance(const LinRegModel& model, const VectorXd& theta);

/**
 * Symmetric PSD Q with Q Q = S(theta). Uses the rank-one closed form when kappa
 * commutes with w w^T (w = kappa^{1/2} e), otherwise the eigendecomposition root.
 */
MatrixXd sqrt_gradient_covariance(const LinRegModel& model, const VectorXd& theta);

// Always the eigendecomposition root.
MatrixXd sqrt_gradient_covariance_eig(const LinRegModel& model, const VectorXd& theta);

// Closed form kappa^{1/2} (sigma I + b(|w|^2) w w^T); valid only in the commuting case.
MatrixXd sqrt_gradient_covariance_closed(const LinRegModel& model, const VectorXd& theta);

// Draws into preallocated storage (x must have size dim()).
void sample_point_into(const LinRegModel& model, Rng& rng, VectorXd& x, double& y);
DataPoint sample_point(const LinRegModel& model, Rng& rng);
std::vector<DataPoint> sample_dataset(const LinRegModel& model, std::size_t n, Rng& rng);

}  // namespace smelab::risk
