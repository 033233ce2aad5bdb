#include "smelab/young_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "smelab/core/errors.hpp"
#include "smelab/core/stats.hpp"

namespace smelab::young {

namespace {

constexpr double kBlowUp = 1e12;

void check_finite(const VectorXd& y, double t) {
    if (!y.allFinite() || y.norm() > kBlowUp)
        throw NumericError("YDE solution blew up at t = " + format_double(t));
}

std::size_t checked_stride(const noise::GridPath& driver, std::size_t stride) {
    if (driver.points() < 2) throw std::invalid_argument("driver needs at least two grid points");
    if (stride == 0 || (driver.points() - 1) % stride != 0)
        throw std::invalid_argument("solver stride must divide the number of driver cells");
    return stride;
}

VectorXd increment(const noise::GridPath& x, std::size_t a, std::size_t b) {
    VectorXd d(static_cast<Eigen::Index>(x.dim));
    for (std::size_t c = 0; c < x.dim; ++c) d(static_cast<Eigen::Index>(c)) = x.at(b, c) - x.at(a, c);
    return d;
}

double spectral_norm(const MatrixXd& m) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

VectorXd young_integral(const MatrixPath& integrand, const noise::GridPath& x, double s, double t) {
    if (!(s <= t)) throw std::invalid_argument("young_integral needs s <= t");
    std::size_t lo = 0, hi = 0;
    try {
        lo = x.index_of(s);
        hi = x.index_of(t);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("interval [" + format_double(s) + ", " + format_double(t) +
                                    "] is not covered by the driver grid");
    }
    VectorXd acc;
    for (std::size_t k = lo; k < hi; ++k) {
        const MatrixXd f = integrand(x.time(k));
        if (f.cols() != static_cast<Eigen::Index>(x.dim)) throw std::invalid_argument("integrand has the wrong width");
        if (acc.size() == 0) acc = VectorXd::Zero(f.rows());
        acc.noalias() += f * increment(x, k, k + 1);
    }
    if (acc.size() == 0) acc = integrand(s) * VectorXd::Zero(static_cast<Eigen::Index>(x.dim));
    return acc;
}

double young_integral(std::span<const double> f, std::span<const double> x, std::size_t lo, std::size_t hi) {
    if (f.size() != x.size()) throw std::invalid_argument("integrand and driver must share a grid");
    if (lo > hi || hi >= x.size()) throw std::invalid_argument("interval outside the grid");
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += f[k] * (x[k + 1] - x[k]);
    return s;
}

void YdeProblem::validate() const {
    if (!drift) throw std::invalid_argument("YDE drift is not set");
    if (sigma.cols() != static_cast<Eigen::Index>(driver.dim))
        throw std::invalid_argument("sigma columns must match the driver dimension");
    if (sigma.rows() != y0.size()) throw std::invalid_argument("sigma rows must match the state dimension");
    if (lambda > lipschitz) throw std::invalid_argument("strong convexity constant exceeds the Lipschitz constant");
}

sme::SdePath solve_yde(const YdeProblem& p, std::size_t stride) {
    p.validate();
    checked_stride(p.driver, stride);
    const double dt = p.driver.dt * static_cast<double>(stride);
    sme::SdePath out;
    out.dt = dt;
    VectorXd y = p.y0;
    out.times.push_back(0.0);
    out.values.push_back(y);
    for (std::size_t k = 0; k + stride < p.driver.points(); k += stride) {
        const double t = p.driver.time(k);
        const double u = p.schedule(t);
        const VectorXd f = p.drift(t, y);
        y += u * dt * f + u * (p.sigma * increment(p.driver, k, k + stride));
        const double t1 = p.driver.time(k + stride);
        check_finite(y, t1);
        out.times.push_back(t1);
        out.values.push_back(y);
    }
    return out;
}

sme::SdePath linear_yde_oracle(const LinearYde& p, std::size_t stride) {
    if (!p.a || !p.b || !p.sigma) throw std::invalid_argument("linear YDE needs A, b and sigma");
    checked_stride(p.driver, stride);
    const auto& x = p.driver;
    const std::size_t last = x.points() - 1;
    {
        const MatrixXd a0 = p.a(x.time(0)), a1 = p.a(x.time(last / 2)), a2 = p.a(x.time(last));
        if (!commutes(a0, a1) || !commutes(a0, a2) || !commutes(a1, a2))
            throw std::invalid_argument("linear_yde_oracle needs A_t that commute across times");
    }
    const double dt = x.dt * static_cast<double>(stride);
    sme::SdePath out;
    out.dt = dt;
    MatrixXd ia = MatrixXd::Zero(p.y0.size(), p.y0.size());
    MatrixXd a_prev = p.a(0.0);
    VectorXd ib = VectorXd::Zero(p.y0.size());
    VectorXd ix = VectorXd::Zero(p.y0.size());
    MatrixXd phi_inv = MatrixXd::Identity(p.y0.size(), p.y0.size());
    if (p.a_integral) phi_inv = (-(*p.a_integral)(0.0)).exp();
    VectorXd fb_prev = phi_inv * p.b(0.0);
    out.times.push_back(0.0);
    out.values.push_back(p.y0);
    for (std::size_t k = 0; k + stride <= last; k += stride) {
        const double t = x.time(k), t1 = x.time(k + stride);
        ix.noalias() += phi_inv * (p.sigma(t) * increment(x, k, k + stride));
        if (p.a_integral) {
            ia = (*p.a_integral)(t1);
        } else {
            const MatrixXd a1 = p.a(t1);
            ia += 0.5 * dt * (a_prev + a1);
            a_prev = a1;
        }
        const MatrixXd phi = ia.exp();
        phi_inv = (-ia).exp();
        const VectorXd fb = phi_inv * p.b(t1);
        ib += 0.5 * dt * (fb_prev + fb);
        fb_prev = fb;
        out.times.push_back(t1);
        out.values.push_back(phi * (p.y0 + ib + ix));
    }
    return out;
}

YdeProblem quadratic_problem(const risk::QuadraticObjective& q, const MatrixXd& sigma, const sgd::Schedule& u,
                             noise::GridPath driver, VectorXd y0) {
    YdeProblem p;
    p.drift = [q](double, const VectorXd& y) -> VectorXd { return -q.gradient(y); };
    p.sigma = sigma;
    p.schedule = u;
    p.driver = std::move(driver);
    p.y0 = std::move(y0);
    p.lambda = q.lambda_min();
    p.lipschitz = q.lambda_max();
    return p;
}

LinearYde quadratic_linear_yde(const risk::QuadraticObjective& q, const MatrixXd& sigma, const sgd::Schedule& u,
                               noise::GridPath driver, VectorXd y0) {
    LinearYde p;
    const MatrixXd kappa = q.kappa();
    const VectorXd kts = q.kappa() * q.theta_star();
    p.a = [kappa, u](double t) -> MatrixXd { return -u(t) * kappa; };
    p.a_integral = MatrixPath([kappa, u](double t) -> MatrixXd { return -u.integral(t) * kappa; });
    p.b = [kts, u](double t) -> VectorXd { return u(t) * kts; };
    p.sigma = [sigma, u](double t) -> MatrixXd { return u(t) * sigma; };
    p.driver = std::move(driver);
    p.y0 = std::move(y0);
    return p;
}

VectorXd inverse_gradient(const std::function<VectorXd(const VectorXd&)>& grad, const VectorXd& target,
                          double lambda, double lipschitz, VectorXd y) {
    if (!(lambda > 0.0) || !(lipschitz >= lambda))
        throw std::invalid_argument("inverse_gradient needs 0 < lambda <= L");
    constexpr int kMaxIter = 1000000;
    for (int it = 0; it < kMaxIter; ++it) {
        const VectorXd step = (grad(y) - target) / lipschitz;
        y -= step;
        if (step.norm() <= 1e-15 * std::max(1.0, y.norm())) return y;
    }
    throw NumericError("inverse_gradient did not converge");
}

YdeProblem as_problem(const GradientYde& g, const noise::EpochedPath& w) {
    YdeProblem p;
    auto grad = g.gradient;
    p.drift = [grad](double, const VectorXd& y) -> VectorXd { return -grad(y); };
    p.sigma = g.sigma;
    p.schedule = g.schedule;
    p.driver = w.w;
    p.y0 = g.y0;
    p.lambda = g.lambda;
    p.lipschitz = g.lipschitz;
    return p;
}

VectorXd BridgeForm::to_bridge(const VectorXd& y) const { return sigma_inv * (y - y_inf) / std::sqrt(period); }

VectorXd BridgeForm::from_bridge(const VectorXd& y_tilde) const {
    return std::sqrt(period) * (sigma * y_tilde) + y_inf;
}

sme::SdePath BridgeForm::from_bridge(const sme::SdePath& tilde) const {
    sme::SdePath out;
    out.dt = tilde.dt * period;
    for (std::size_t k = 0; k < tilde.values.size(); ++k) {
        out.times.push_back(tilde.times[k] * period);
        out.values.push_back(from_bridge(tilde.values[k]));
    }
    return out;
}

sme::SdePath BridgeForm::to_bridge(const sme::SdePath& path) const {
    sme::SdePath out;
    out.dt = path.dt / period;
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        out.times.push_back(path.times[k] / period);
        out.values.push_back(to_bridge(path.values[k]));
    }
    return out;
}

BridgeForm reduce_to_bridge_form(const GradientYde& g, const noise::EpochedPath& w) {
    if (!g.gradient) throw std::invalid_argument("gradient is not set");
    if (g.sigma.rows() != g.sigma.cols() || g.sigma.rows() != static_cast<Eigen::Index>(w.dim()))
        throw std::invalid_argument("bridge form needs a square sigma matching the driver dimension");
    Eigen::FullPivLU<MatrixXd> lu(g.sigma);
    if (!lu.isInvertible()) throw std::invalid_argument("bridge form needs an invertible sigma");
    BridgeForm f;
    f.period = w.period;
    f.sigma = g.sigma;
    f.sigma_inv = lu.inverse();
    const double T = w.period;
    const double rt = std::sqrt(T);
    const VectorXd target = g.sigma * w.w_at_epoch_end(0) / T;
    f.y_inf = inverse_gradient(g.gradient, target, g.lambda, g.lipschitz, g.y0);

    YdeProblem& p = f.problem;
    auto grad = g.gradient;
    const MatrixXd sig = f.sigma, sig_inv = f.sigma_inv;
    const VectorXd y_inf = f.y_inf;
    p.drift = [grad, sig, sig_inv, y_inf, target, rt](double, const VectorXd& yt) -> VectorXd {
        return -rt * (sig_inv * (grad(rt * (sig * yt) + y_inf) - target));
    };
    p.sigma = MatrixXd::Identity(g.sigma.rows(), g.sigma.rows());
    p.schedule = g.schedule.time_scaled(T);
    p.driver = w.bridge;
    p.y0 = f.to_bridge(g.y0);
    // Exact when sigma commutes with the Hessian.
    p.lambda = g.lambda * T;
    p.lipschitz = g.lipschitz * T;
    return f;
}

double holder_seminorm(const noise::GridPath& path, std::size_t first, std::size_t last, double alpha) {
    if (!(first < last) || last >= path.points()) throw std::invalid_argument("holder_seminorm: bad index range");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0, 1]");
    const std::size_t span_cells = last - first;
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; l < span_cells; l *= 2) lags.push_back(l);
    lags.push_back(span_cells);
    double best = 0.0;
    for (std::size_t l : lags) {
        const double denom = std::pow(static_cast<double>(l) * path.dt, alpha);
        for (std::size_t k = first; k + l <= last; ++k) {
            double sq = 0.0;
            for (std::size_t c = 0; c < path.dim; ++c) {
                const double d = path.at(k + l, c) - path.at(k, c);
                sq += d * d;
            }
            best = std::max(best, std::sqrt(sq) / denom);
        }
    }
    return best;
}

CsvTable RateReport::to_csv() const {
    CsvTable table({"t", "error", "bound_sqrt_log", "bound_holder"});
    for (std::size_t k = 0; k < times.size(); ++k) table.add_row({times[k], errors[k], bound_sqrt_log[k], bound_holder[k]});
    return table;
}

nlohmann::json RateReport::summary() const {
    auto vec = [](const VectorXd& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    nlohmann::json j = meta;
    j["slope"] = slope;
    j["intercept"] = intercept;
    j["fitted_points"] = fitted_points;
    if (std::isnan(c_alpha))
        j["c_alpha"] = nullptr;
    else
        j["c_alpha"] = c_alpha;
    j["period"] = period;
    j["c"] = c;
    j["c_bridge_scale"] = c * period;
    j["y_inf"] = vec(y_inf);
    j["y_final"] = vec(y_final);
    return j;
}

MatrixXd sgdo_sigma(const risk::LinRegModel& model, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step size h must be positive");
    return std::sqrt(h) * model.sigma_eps() * model.kappa_sqrt();
}

VectorXd quadratic_limit(const risk::LinRegModel& model, double period, const MatrixXd& sigma, const VectorXd& v) {
    const VectorXd w_t = std::sqrt(period) * v;
    return model.theta_star() + model.kappa().ldlt().solve(sigma * w_t / period);
}

VectorXd sgdo_limit_v(std::uint64_t seed, Eigen::Index dim) {
    Rng rng = StreamKey(seed).child("sgdo-sme").child("v").rng();
    std::normal_distribution<double> n01;
    VectorXd v(dim);
    for (Eigen::Index c = 0; c < dim; ++c) v(c) = n01(rng);
    return v;
}

RateReport sgdo_sme_experiment(const risk::LinRegModel& model, const SgdoSmeOptions& o) {
    if (!(o.beta > 0.0 && o.beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    if (o.n == 0) throw std::invalid_argument("N must be positive");
    if (o.epochs == 0) throw std::invalid_argument("at least one epoch is required");
    if (!(o.time_factor > 1.0)) throw std::invalid_argument("time factor must exceed 1");
    const auto u = sgd::Schedule::polynomial(o.c, o.beta);
    const Eigen::Index d = model.dim();
    const auto q = model.objective();
    const double T = static_cast<double>(o.n) * o.h;
    const double rt = std::sqrt(T);
    const std::size_t m = o.grid;
    const double dt = T / static_cast<double>(m);
    const MatrixXd sigma = sgdo_sigma(model, o.h);
    const VectorXd v = sgdo_limit_v(o.seed, d);
    const VectorXd y_inf = quadratic_limit(model, T, sigma, v);
    const MatrixXd& kappa = model.kappa();
    const VectorXd& theta_star = model.theta_star();
    VectorXd y = o.theta0 ? *o.theta0 : VectorXd(theta_star.array() - 1.0);
    if (y.size() != d) throw std::invalid_argument("theta0 has the wrong dimension");

    const double lam = q.lambda_min(), lip = q.lambda_max();
    const double sig_norm = spectral_norm(sigma);
    const double pre = std::pow(T, 0.5 - o.beta) * sig_norm * std::pow(o.c, -o.beta);

    // Epoch ends at which the error is recorded.
    std::vector<std::size_t> marks;
    for (std::size_t e = 1; e <= o.epochs;) {
        marks.push_back(e);
        e = std::max(e + 1, static_cast<std::size_t>(std::llround(static_cast<double>(e) * o.time_factor)));
    }
    if (marks.back() != o.epochs) marks.push_back(o.epochs);

    noise::NamedEpochStream stream(o.scheme, m, static_cast<std::size_t>(d), StreamKey(o.seed).child("sgdo-sme").child("bridge"));
    const bool finite_epochs =
        o.scheme == noise::NamedScheme::single_shuffle || o.scheme == noise::NamedScheme::flipflop_single;
    const std::size_t distinct = o.scheme == noise::NamedScheme::flipflop_single ? 2 : 1;

    RateReport rep;
    rep.period = T;
    rep.c = o.c;
    rep.y_inf = y_inf;
    rep.c_alpha = finite_epochs ? 0.0 : std::numeric_limits<double>::quiet_NaN();

    VectorXd g(d), dw(d), drift_v = v * (dt / rt);
    std::size_t next_mark = 0;
    for (std::size_t j = 0; j < o.epochs; ++j) {
        const auto& ep = stream.next();
        if (finite_epochs && j < distinct) {
            noise::GridPath bridge;
            bridge.dt = 1.0 / static_cast<double>(m);
            bridge.dim = static_cast<std::size_t>(d);
            bridge.values = ep;
            rep.c_alpha = std::max(rep.c_alpha, holder_seminorm(bridge, 0, m, o.alpha));
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double t = static_cast<double>(j) * T + static_cast<double>(k) * dt;
            const double uk = u(t);
            for (Eigen::Index c = 0; c < d; ++c)
                dw(c) = rt * (ep[(k + 1) * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)] -
                              ep[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)]) +
                        drift_v(c);
            g.noalias() = kappa * (y - theta_star);
            y.noalias() += uk * dt * (-g);
            y.noalias() += uk * (sigma * dw);
        }
        const double t_end = static_cast<double>(j + 1) * T;
        check_finite(y, t_end);
        if (next_mark < marks.size() && marks[next_mark] == j + 1) {
            ++next_mark;
            rep.times.push_back(t_end);
            rep.errors.push_back((y - y_inf).norm());
            const double lt = std::pow(t_end, -o.beta);
            rep.bound_sqrt_log.push_back(pre * (4.7 * lip / lam + 1.2) * std::sqrt(std::log(t_end)) * lt);
            rep.bound_holder.push_back(finite_epochs
                                        ? rep.c_alpha * pre * (lip / lam / (1.0 - std::pow(2.0, -o.alpha)) + 1.0) * lt
                                        : std::numeric_limits<double>::quiet_NaN());
        }
    }
    rep.y_final = y;

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        if (rep.times[k] >= o.burn_in && rep.errors[k] > 0.0) {
            lx.push_back(std::log(rep.times[k]));
            ly.push_back(std::log(rep.errors[k]));
        }
    }
    rep.fitted_points = lx.size();
    if (lx.size() >= 2) {
        const auto fit = least_squares(lx, ly);
        rep.slope = fit.slope;
        rep.intercept = fit.intercept;
    } else {
        rep.slope = rep.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    rep.meta = {{"scheme", noise::to_string(o.scheme)}, {"N", o.n},          {"h", o.h},
                {"beta", o.beta},                     {"epochs", o.epochs}, {"grid", o.grid},
                {"seed", o.seed},                     {"alpha", o.alpha},   {"burn_in", o.burn_in},
                {"lambda", lam},                      {"L", lip},           {"sigma_norm", sig_norm}};
    return rep;
}

}  // namespace smelab::young
