#include "smelab/risk_models.hpp"

#include <cmath>
#include <stdexcept>

#include "smelab/core/errors.hpp"

namespace smelab::risk {

namespace {

void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
    if (expected != got)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                    std::to_string(expected) + ", got " + std::to_string(got) + ")");
}

void require_spd(const MatrixXd& kappa) {
    if (kappa.rows() == 0 || kappa.rows() != kappa.cols())
        throw std::invalid_argument("kappa must be a nonempty square matrix");
    if (!is_symmetric(kappa)) throw std::invalid_argument("kappa must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(kappa, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("kappa must be positive definite");
}

}  // namespace

std::string to_string(ScalarLaw law) {
    switch (law) {
        case ScalarLaw::gaussian: return "gaussian";
        case ScalarLaw::exponential: return "exponential";
        case ScalarLaw::uniform: return "uniform";
        case ScalarLaw::rademacher: return "rademacher";
        case ScalarLaw::lognormal: return "lognormal";
    }
    return "unknown";
}

ScalarLaw scalar_law_from_string(std::string_view name) {
    if (name == "gaussian" || name == "normal") return ScalarLaw::gaussian;
    if (name == "exponential" || name == "exp") return ScalarLaw::exponential;
    if (name == "uniform") return ScalarLaw::uniform;
    if (name == "rademacher") return ScalarLaw::rademacher;
    if (name == "lognormal") return ScalarLaw::lognormal;
    throw std::invalid_argument("unknown scalar law: " + std::string(name));
}

double kurtosis(ScalarLaw law, double s) {
    switch (law) {
        case ScalarLaw::gaussian: return 3.0;
        case ScalarLaw::exponential: return 9.0;
        case ScalarLaw::uniform: return 9.0 / 5.0;
        case ScalarLaw::rademacher: return 1.0;
        case ScalarLaw::lognormal: {
            const double v = s * s;
            return std::exp(4 * v) + 2 * std::exp(3 * v) + 3 * std::exp(2 * v) - 3;
        }
    }
    throw std::invalid_argument("unknown scalar law");
}

double sample_standardized(const ScalarIidFeatures& law, Rng& rng) {
    switch (law.law) {
        case ScalarLaw::gaussian: return std::normal_distribution<double>()(rng);
        case ScalarLaw::exponential: return std::exponential_distribution<double>(1.0)(rng) - 1.0;
        case ScalarLaw::uniform:
            return std::sqrt(3.0) * (2.0 * std::uniform_real_distribution<double>()(rng) - 1.0);
        case ScalarLaw::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
        case ScalarLaw::lognormal: {
            const double s = law.lognormal_sigma;
            const double m = std::exp(0.5 * s * s);
            const double sd = std::sqrt((std::exp(s * s) - 1.0) * std::exp(s * s));
            return (std::exp(s * std::normal_distribution<double>()(rng)) - m) / sd;
        }
    }
    throw std::invalid_argument("unknown scalar law");
}

QuadraticObjective::QuadraticObjective(MatrixXd kappa, VectorXd theta_star, double offset)
    : kappa_(std::move(kappa)), theta_star_(std::move(theta_star)), offset_(offset) {
    require_spd(kappa_);
    require_dim(kappa_.rows(), theta_star_.size(), "QuadraticObjective");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(kappa_, Eigen::EigenvaluesOnly);
    lambda_min_ = es.eigenvalues().minCoeff();
    lambda_max_ = es.eigenvalues().maxCoeff();
}

void QuadraticObjective::check_dim(const VectorXd& theta) const {
    require_dim(dim(), theta.size(), "QuadraticObjective");
}

double QuadraticObjective::excess(const VectorXd& theta) const {
    check_dim(theta);
    const VectorXd e = theta - theta_star_;
    return 0.5 * e.dot(kappa_ * e);
}

double QuadraticObjective::value(const VectorXd& theta) const { return excess(theta) + offset_; }

VectorXd QuadraticObjective::gradient(const VectorXd& theta) const {
    check_dim(theta);
    return kappa_ * (theta - theta_star_);
}

LinRegModel::LinRegModel(MatrixXd kappa, VectorXd theta_star, double sigma_eps, FeatureLaw law)
    : kappa_(std::move(kappa)), theta_star_(std::move(theta_star)), sigma_eps_(sigma_eps), law_(law) {
    require_spd(kappa_);
    require_dim(kappa_.rows(), theta_star_.size(), "LinRegModel");
    if (!(sigma_eps_ >= 0.0) || !std::isfinite(sigma_eps_))
        throw std::invalid_argument("sigma_eps must be finite and nonnegative");
    if (const auto* a = std::get_if<AbstractFeatures>(&law_); a && !(a->b_eq >= 0.0))
        throw std::invalid_argument("abstract feature law needs B^Eq >= 0");
    if (const auto* s = std::get_if<ScalarIidFeatures>(&law_);
        s && s->law == ScalarLaw::lognormal && !(s->lognormal_sigma > 0.0))
        throw std::invalid_argument("lognormal feature law needs sigma > 0");
    kappa_sqrt_ = sym_sqrt_psd(kappa_);
}

LinRegModel LinRegModel::scalar(double kappa, double theta_star, double sigma_eps, FeatureLaw law) {
    return LinRegModel(MatrixXd::Constant(1, 1, kappa), VectorXd::Constant(1, theta_star), sigma_eps, law);
}

QuadraticObjective LinRegModel::objective() const {
    return QuadraticObjective(kappa_, theta_star_, 0.5 * sigma_eps_ * sigma_eps_);
}

std::optional<double> LinRegModel::feature_kurtosis() const {
    if (dim() != 1) return std::nullopt;
    if (std::holds_alternative<GaussianFeatures>(law_)) return 3.0;
    if (const auto* s = std::get_if<ScalarIidFeatures>(&law_)) return kurtosis(s->law, s->lognormal_sigma);
    return std::nullopt;
}

double population_risk(const LinRegModel& model, const VectorXd& theta) {
    return excess_risk(model, theta) + 0.5 * model.sigma_eps() * model.sigma_eps();
}

double excess_risk(const LinRegModel& model, const VectorXd& theta) {
    require_dim(model.dim(), theta.size(), "excess_risk");
    const VectorXd e = theta - model.theta_star();
    return 0.5 * e.dot(model.kappa() * e);
}

VectorXd point_gradient(const VectorXd& theta, const DataPoint& z) {
    require_dim(theta.size(), z.x.size(), "point_gradient");
    return (theta.dot(z.x) - z.y) * z.x;
}

double b_eq(const LinRegModel& model) {
    const auto& law = model.feature_law();
    if (std::holds_alternative<GaussianFeatures>(law)) return 1.0;
    if (const auto* a = std::get_if<AbstractFeatures>(&law)) return a->b_eq;
    const auto& s = std::get<ScalarIidFeatures>(law);
    if (model.dim() == 1 || s.law == ScalarLaw::gaussian) return 0.5 * (kurtosis(s.law, s.lognormal_sigma) - 1.0);
    throw std::invalid_argument("B^Eq is not determined by a non-Gaussian i.i.d. feature law in d > 1");
}

MatrixXd gradient_covariance(const LinRegModel& model, const VectorXd& theta) {
    require_dim(model.dim(), theta.size(), "gradient_covariance");
    const VectorXd ke = model.kappa() * (theta - model.theta_star());
    const double s2 = model.sigma_eps() * model.sigma_eps();
    return 2.0 * b_eq(model) * ke * ke.transpose() + s2 * model.kappa();
}

MatrixXd sqrt_gradient_covariance_eig(const LinRegModel& model, const VectorXd& theta) {
    return sym_sqrt_psd(gradient_covariance(model, theta));
}

MatrixXd sqrt_gradient_covariance_closed(const LinRegModel& model, const VectorXd& theta) {
    require_dim(model.dim(), theta.size(), "sqrt_gradient_covariance");
    const double c = 2.0 * b_eq(model);
    const double sig = model.sigma_eps();
    const VectorXd w = model.kappa_sqrt() * (theta - model.theta_star());
    const double t = w.squaredNorm();
    const Eigen::Index d = model.dim();
    MatrixXd m_half = sig * MatrixXd::Identity(d, d);
    if (t > 0.0) {
        // a_t / t in the cancellation-free form c / (sigma + sqrt(ct + sigma^2)).
        const double denom = sig + std::sqrt(c * t + sig * sig);
        const double b = denom > 0.0 ? c / denom : 0.0;
        m_half += b * w * w.transpose();
    }
    return model.kappa_sqrt() * m_half;
}

MatrixXd sqrt_gradient_covariance(const LinRegModel& model, const VectorXd& theta) {
    require_dim(model.dim(), theta.size(), "sqrt_gradient_covariance");
    if (model.dim() == 1) return sqrt_gradient_covariance_closed(model, theta);
    const VectorXd w = model.kappa_sqrt() * (theta - model.theta_star());
    if (commutes(model.kappa(), w * w.transpose(), 1e-12)) {
        MatrixXd q = sqrt_gradient_covariance_closed(model, theta);
        return 0.5 * (q + q.transpose());
    }
    return sqrt_gradient_covariance_eig(model, theta);
}

void sample_point_into(const LinRegModel& model, Rng& rng, VectorXd& x, double& y) {
    const auto& law = model.feature_law();
    const Eigen::Index d = model.dim();
    if (std::holds_alternative<AbstractFeatures>(law))
        throw std::invalid_argument("cannot sample from an abstract feature law");
    if (std::holds_alternative<GaussianFeatures>(law)) {
        std::normal_distribution<double> n01;
        if (d == 1) {
            x(0) = model.kappa_sqrt()(0, 0) * n01(rng);
        } else {
            VectorXd xi(d);
            for (Eigen::Index i = 0; i < d; ++i) xi(i) = n01(rng);
            x.noalias() = model.kappa_sqrt() * xi;
        }
    } else {
        const auto& s = std::get<ScalarIidFeatures>(law);
        if (d == 1) {
            x(0) = model.kappa_sqrt()(0, 0) * sample_standardized(s, rng);
        } else {
            VectorXd xi(d);
            for (Eigen::Index i = 0; i < d; ++i) xi(i) = sample_standardized(s, rng);
            x.noalias() = model.kappa_sqrt() * xi;
        }
    }
    const double eps = model.sigma_eps() > 0.0 ? model.sigma_eps() * std::normal_distribution<double>()(rng) : 0.0;
    y = model.theta_star().dot(x) + eps;
}

DataPoint sample_point(const LinRegModel& model, Rng& rng) {
    DataPoint z{VectorXd(model.dim()), 0.0};
    sample_point_into(model, rng, z.x, z.y);
    return z;
}

std::vector<DataPoint> sample_dataset(const LinRegModel& model, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("sample_dataset: n must be >= 1");
    std::vector<DataPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_point(model, rng));
    return out;
}

}  // namespace smelab::risk
