#include "smelab/sme_integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "smelab/core/errors.hpp"

namespace smelab::sme {

namespace {

constexpr double kBlowUp = 1e12;

void check_state(const VectorXd& x, double t) {
    if (!x.allFinite() || x.norm() > kBlowUp)
        throw NumericError("SDE state blew up at t = " + format_double(t) + " (|X| = " + format_double(x.norm()) + ")");
}

std::size_t step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("euler_maruyama: T and dt must be positive");
    if (dt > T) throw std::invalid_argument("euler_maruyama: dt must not exceed T");
    return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

}  // namespace

std::string to_string(SmeKind kind) {
    switch (kind) {
        case SmeKind::GF: return "GF";
        case SmeKind::CC: return "CC";
        case SmeKind::NCC: return "NCC";
        case SmeKind::SGF2: return "SGF2";
    }
    return "unknown";
}

SmeKind sme_kind_from_string(const std::string& name) {
    if (name == "GF") return SmeKind::GF;
    if (name == "CC") return SmeKind::CC;
    if (name == "NCC") return SmeKind::NCC;
    if (name == "SGF2") return SmeKind::SGF2;
    throw std::invalid_argument("unknown SME kind: " + name);
}

SmeSpec::SmeSpec(SmeKind kind, risk::QuadraticObjective objective, NoiseParams noise)
    : kind_(kind),
      q_(std::move(objective)),
      noise_(noise),
      noise_model_(q_.kappa(), q_.theta_star(), noise.sigma_eps, risk::AbstractFeatures{noise.b_eq}) {
    if (noise_.batch == 0) throw std::invalid_argument("SmeSpec: batch size must be >= 1");
    if (!(noise_.h >= 0.0)) throw std::invalid_argument("SmeSpec: h must be >= 0");
    frozen_ = std::sqrt(noise_.h / static_cast<double>(noise_.batch)) *
              risk::sqrt_gradient_covariance(noise_model_, q_.theta_star());
}

VectorXd SmeSpec::drift(const VectorXd& theta) const {
    if (kind_ == SmeKind::SGF2) return second_order_drift(q_, noise_.h, theta);
    return -q_.gradient(theta);
}

MatrixXd SmeSpec::diffusion(const VectorXd& theta) const {
    const Eigen::Index d = dim();
    switch (kind_) {
        case SmeKind::GF: return MatrixXd::Zero(d, d);
        case SmeKind::CC: return frozen_;
        case SmeKind::NCC:
        case SmeKind::SGF2:
            return std::sqrt(noise_.h / static_cast<double>(noise_.batch)) *
                   risk::sqrt_gradient_covariance(noise_model_, theta);
    }
    throw std::logic_error("unhandled SME kind");
}

CsvTable SdePath::to_csv() const {
    const Eigen::Index d = values.empty() ? 0 : values.front().size();
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
    CsvTable table(header);
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::vector<CsvCell> row{times[k]};
        for (Eigen::Index i = 0; i < d; ++i) row.emplace_back(values[k](i));
        table.add_row(std::move(row));
    }
    return table;
}

VectorXd gradient_flow_exact(const risk::QuadraticObjective& q, const VectorXd& theta0, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("gradient_flow_exact: t must be >= 0");
    if (theta0.size() != q.dim()) throw std::invalid_argument("gradient_flow_exact: dimension mismatch");
    return sym_exp(q.kappa(), -t) * (theta0 - q.theta_star()) + q.theta_star();
}

VectorXd second_order_drift(const risk::QuadraticObjective& q, double h, const VectorXd& theta) {
    const VectorXd g = q.gradient(theta);
    return -(g + 0.5 * h * (q.kappa() * g));
}

SdePath euler_maruyama(const SmeSpec& spec, const VectorXd& theta0, double T, double dt, Rng& rng) {
    if (theta0.size() != spec.dim()) throw std::invalid_argument("euler_maruyama: dimension mismatch");
    const std::size_t n = step_count(T, dt);
    const double step = T / static_cast<double>(n);
    const double sq = std::sqrt(step);
    const Eigen::Index d = spec.dim();
    std::normal_distribution<double> n01;
    SdePath path;
    path.dt = step;
    path.times.reserve(n + 1);
    path.values.reserve(n + 1);
    path.times.push_back(0.0);
    path.values.push_back(theta0);
    VectorXd x = theta0;
    VectorXd xi(d);
    for (std::size_t k = 0; k < n; ++k) {
        VectorXd next = x + spec.drift(x) * step;
        if (spec.kind() != SmeKind::GF) {
            for (Eigen::Index i = 0; i < d; ++i) xi(i) = n01(rng);
            next += spec.diffusion(x) * (sq * xi);
        }
        x = std::move(next);
        const double t = static_cast<double>(k + 1) * step;
        check_state(x, t);
        path.times.push_back(t);
        path.values.push_back(x);
    }
    return path;
}

VectorXd euler_maruyama_final(const SmeSpec& spec, const VectorXd& theta0, double T, double dt, Rng& rng) {
    if (spec.dim() != 1) return euler_maruyama(spec, theta0, T, dt, rng).values.back();
    if (theta0.size() != 1) throw std::invalid_argument("euler_maruyama_final: dimension mismatch");
    const std::size_t n = step_count(T, dt);
    const double step = T / static_cast<double>(n);
    const double sq = std::sqrt(step);
    const auto& q = spec.objective();
    const double kappa = q.kappa()(0, 0);
    const double ts = q.theta_star()(0);
    const auto& nz = spec.noise();
    const double scale = std::sqrt(nz.h / static_cast<double>(nz.batch));
    const double s2 = nz.sigma_eps * nz.sigma_eps;
    const double drift_factor = spec.kind() == SmeKind::SGF2 ? kappa * (1.0 + 0.5 * nz.h * kappa) : kappa;
    const double frozen = scale * std::sqrt(s2 * kappa);
    std::normal_distribution<double> n01;
    double x = theta0(0);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = x - ts;
        double next = x - drift_factor * e * step;
        switch (spec.kind()) {
            case SmeKind::GF: break;
            case SmeKind::CC: next += frozen * sq * n01(rng); break;
            case SmeKind::NCC:
            case SmeKind::SGF2:
                next += scale * std::sqrt(2.0 * nz.b_eq * kappa * kappa * e * e + s2 * kappa) * sq * n01(rng);
                break;
        }
        x = next;
        if (!std::isfinite(x) || std::abs(x) > kBlowUp)
            throw NumericError("SDE state blew up at t = " + format_double(static_cast<double>(k + 1) * step));
    }
    return VectorXd::Constant(1, x);
}

double cc_exact_sample_1d(const SmeSpec& spec, double theta0, double t, Rng& rng) {
    if (spec.dim() != 1) throw std::invalid_argument("cc_exact_sample_1d requires d = 1");
    const auto& q = spec.objective();
    const double kappa = q.kappa()(0, 0);
    const double ts = q.theta_star()(0);
    const auto& nz = spec.noise();
    const double var = nz.h * nz.sigma_eps * nz.sigma_eps / (2.0 * static_cast<double>(nz.batch)) *
                       (-std::expm1(-2.0 * kappa * t));
    return std::exp(-kappa * t) * (theta0 - ts) + ts + std::sqrt(var) * std::normal_distribution<double>()(rng);
}

double zeta(const ScalarParams& p, double h) {
    return 1.0 - h / (2.0 * static_cast<double>(p.batch)) * p.kappa * (p.kurtosis - 1.0);
}

double xi(const ScalarParams& p, double h) { return zeta(p, h) + 0.5 * h * p.kappa; }

double expected_excess_risk(SmeKind kind, const ScalarParams& p, double h, double t, double re0) {
    if (!(t >= 0.0)) throw std::invalid_argument("expected_excess_risk: t must be >= 0");
    if (p.batch == 0) throw std::invalid_argument("expected_excess_risk: batch must be >= 1");
    const double b = static_cast<double>(p.batch);
    const double s2 = p.sigma_eps * p.sigma_eps;
    switch (kind) {
        case SmeKind::GF: return std::exp(-2.0 * p.kappa * t) * re0;
        case SmeKind::CC:
            return std::exp(-2.0 * p.kappa * t) * re0 - h * s2 / (4.0 * b) * std::expm1(-2.0 * p.kappa * t);
        case SmeKind::NCC:
        case SmeKind::SGF2: {
            const double r = kind == SmeKind::NCC ? zeta(p, h) : xi(p, h);
            if (!(r > 0.0))
                throw NumericError(std::string(kind == SmeKind::NCC ? "zeta" : "xi") + "^h = " + format_double(r) +
                                   " <= 0: step size h = " + format_double(h) + " too large for the closed form");
            return std::exp(-2.0 * p.kappa * r * t) * re0 - h * s2 / (4.0 * b * r) * std::expm1(-2.0 * p.kappa * r * t);
        }
    }
    throw std::logic_error("unhandled SME kind");
}

}  // namespace smelab::sme
