#include "smelab/error_analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "smelab/core/errors.hpp"
#include "smelab/core/parallel.hpp"
#include "smelab/sgd_engine.hpp"

namespace smelab::analysis {

namespace {

bool near(double x, double y, double tol = kTieTolerance) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return std::abs(x - y) <= tol * scale;
}

struct Spectral {
    MatrixXd v;
    VectorXd lam;
    explicit Spectral(const MatrixXd& kappa) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(kappa);
        v = es.eigenvectors();
        lam = es.eigenvalues();
    }
    MatrixXd fn(const std::function<double(double)>& f) const {
        return v * lam.unaryExpr(f).asDiagonal() * v.transpose();
    }
};

double a_term(const Spectral& sp, const VectorXd& e, double T) {
    const MatrixXd m = sp.fn([T](double l) { return l * l * l * std::exp(-2.0 * T * l); });
    return 0.5 * T * e.dot(m * e);
}

double c_inner(const Spectral& sp, double T) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < sp.lam.size(); ++i) s += -sp.lam(i) * std::expm1(-2.0 * T * sp.lam(i));
    return s;
}

void check_inputs(const risk::QuadraticObjective& q, const VectorXd& theta0, double T, double batch) {
    if (theta0.size() != q.dim()) throw std::invalid_argument("linear error: dimension mismatch");
    if (!(T > 0.0)) throw std::invalid_argument("linear error: T must be positive");
    if (!(batch >= 1.0)) throw std::invalid_argument("linear error: batch must be >= 1");
}

}  // namespace

LinearErrorReport linear_error_terms(const risk::QuadraticObjective& q, const VectorXd& theta0, double T,
                                     double batch, double b_eq, double sigma_eps) {
    check_inputs(q, theta0, T, batch);
    const Spectral sp(q.kappa());
    const VectorXd e = theta0 - q.theta_star();
    LinearErrorReport r;
    r.batch = batch;
    r.horizon = T;
    r.b_eq = b_eq;
    r.a = a_term(sp, e, T);
    r.b = 2.0 * r.a * b_eq;
    r.c = 0.25 * sigma_eps * sigma_eps * c_inner(sp, T);
    r.le_ncc = -r.a;
    r.le_cc = -r.a + r.b / batch;
    r.le_gf = -r.a + r.b / batch + r.c / batch;
    if (r.a > 0.0) r.b_gf = (2.0 * r.b + r.c) / (2.0 * r.a);
    return r;
}

std::optional<double> b_gf_direct(const risk::QuadraticObjective& q, const VectorXd& theta0, double T, double b_eq,
                                  double sigma_eps) {
    check_inputs(q, theta0, T, 1.0);
    const Spectral sp(q.kappa());
    const VectorXd e = theta0 - q.theta_star();
    const MatrixXd k3 = sp.fn([T](double l) { return l * l * l * std::exp(-2.0 * T * l); });
    const double denom = 4.0 * T * e.dot(k3 * e);
    if (!(denom > 0.0)) return std::nullopt;
    return 2.0 * b_eq + sigma_eps * sigma_eps * c_inner(sp, T) / denom;
}

DiffusionMatrix diffusion_matrix(sme::SmeKind kind, const risk::QuadraticObjective& q, double batch, double b_eq,
                                 double sigma_eps) {
    const MatrixXd kappa = q.kappa();
    const VectorXd ts = q.theta_star();
    const double s2 = sigma_eps * sigma_eps;
    switch (kind) {
        case sme::SmeKind::GF: return [d = q.dim()](const VectorXd&) { return MatrixXd::Zero(d, d); };
        case sme::SmeKind::CC: return [=](const VectorXd&) { return MatrixXd(s2 * kappa / batch); };
        case sme::SmeKind::NCC:
        case sme::SmeKind::SGF2:
            return [=](const VectorXd& th) {
                const VectorXd ke = kappa * (th - ts);
                return MatrixXd((2.0 * b_eq * ke * ke.transpose() + s2 * kappa) / batch);
            };
    }
    throw std::logic_error("unhandled SME kind");
}

double linear_error_quadrature(const risk::QuadraticObjective& q, const VectorXd& theta0, double T, double batch,
                               double b_eq, double sigma_eps, const DiffusionMatrix& d, std::size_t panels) {
    check_inputs(q, theta0, T, batch);
    if (panels < 2 || panels % 2 != 0) throw std::invalid_argument("Simpson rule needs an even panel count");
    const Spectral sp(q.kappa());
    const VectorXd e = theta0 - q.theta_star();
    const MatrixXd& kappa = q.kappa();
    const double s2 = sigma_eps * sigma_eps;
    auto integrand = [&](double t) {
        const VectorXd et = sp.fn([t](double l) { return std::exp(-t * l); }) * e;
        const VectorXd xt = et + q.theta_star();
        const VectorXd ke = kappa * et;
        const MatrixXd sigma = (2.0 * b_eq * ke * ke.transpose() + s2 * kappa) / batch;
        const MatrixXd w = sp.fn([t, T](double l) { return l * std::exp(-2.0 * (T - t) * l); });
        return frobenius_inner(w, sigma - d(xt));
    };
    const double step = T / static_cast<double>(panels);
    double acc = integrand(0.0) + integrand(T);
    for (std::size_t k = 1; k < panels; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * integrand(step * static_cast<double>(k));
    return 0.5 * acc * step / 3.0 - a_term(sp, e, T);
}

std::string to_string(Approx a) {
    switch (a) {
        case Approx::GF: return "GF";
        case Approx::CC: return "CC";
        case Approx::NCC: return "NCC";
    }
    return "?";
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::i: return "i";
        case Regime::ii: return "ii";
        case Regime::iii: return "iii";
        case Regime::boundary_iii_iv: return "boundary iii/iv";
        case Regime::iv: return "iv";
        case Regime::boundary_iv_v: return "boundary iv/v";
        case Regime::v: return "v";
        case Regime::degenerate_gf_worst: return "degenerate (B^Eq = 0), B < B^GF";
        case Regime::degenerate_tie: return "degenerate (B^Eq = 0), B = B^GF";
        case Regime::degenerate_gf_best: return "degenerate (B^Eq = 0), B > B^GF";
        case Regime::undefined: return "undefined (theta0 = theta*)";
    }
    return "?";
}

std::vector<std::vector<Approx>> regime_ordering(Regime r) {
    using A = Approx;
    switch (r) {
        case Regime::i: return {{A::GF}, {A::CC}, {A::NCC}};
        case Regime::ii: return {{A::GF}, {A::CC, A::NCC}};
        case Regime::iii: return {{A::GF}, {A::NCC}, {A::CC}};
        case Regime::boundary_iii_iv: return {{A::GF, A::NCC}, {A::CC}};
        case Regime::iv: return {{A::NCC}, {A::GF}, {A::CC}};
        case Regime::boundary_iv_v: return {{A::NCC}, {A::GF, A::CC}};
        case Regime::v: return {{A::NCC}, {A::CC}, {A::GF}};
        case Regime::degenerate_gf_worst: return {{A::GF}, {A::CC, A::NCC}};
        case Regime::degenerate_tie: return {{A::GF, A::CC, A::NCC}};
        case Regime::degenerate_gf_best: return {{A::CC, A::NCC}, {A::GF}};
        case Regime::undefined: return {};
    }
    return {};
}

std::vector<std::vector<Approx>> ordering_from_le(const LinearErrorReport& report, double tol) {
    std::vector<std::pair<double, Approx>> v{
        {std::abs(report.le_gf), Approx::GF}, {std::abs(report.le_cc), Approx::CC}, {std::abs(report.le_ncc), Approx::NCC}};
    std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<std::vector<Approx>> groups;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0 && near(v[k - 1].first, v[k].first, tol)) groups.back().push_back(v[k].second);
        else groups.push_back({v[k].second});
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return groups;
}

std::string RegimeClassification::ordering_text() const {
    std::string out;
    for (std::size_t g = 0; g < ordering.size(); ++g) {
        if (g) out += " < ";
        for (std::size_t k = 0; k < ordering[g].size(); ++k) {
            if (k) out += " ~ ";
            out += to_string(ordering[g][k]);
        }
    }
    return out;
}

RegimeClassification classify_regime(double batch, const LinearErrorReport& report) {
    if (!(batch >= 1.0)) throw std::invalid_argument("classify_regime: batch must be >= 1");
    LinearErrorReport r = report;
    r.batch = batch;
    r.le_cc = -r.a + r.b / batch;
    r.le_gf = -r.a + (r.b + r.c) / batch;
    RegimeClassification out;
    out.ordering = ordering_from_le(r);
    if (!r.b_gf) {
        out.regime = Regime::undefined;
        return out;
    }
    const double beq = r.b_eq;
    const double bgf = *r.b_gf;
    if (beq == 0.0) {
        if (near(batch, bgf)) out.regime = Regime::degenerate_tie;
        else out.regime = batch < bgf ? Regime::degenerate_gf_worst : Regime::degenerate_gf_best;
    } else if (near(batch, beq)) {
        out.regime = Regime::ii;
    } else if (batch < beq) {
        out.regime = Regime::i;
    } else if (near(batch, bgf - beq)) {
        out.regime = Regime::boundary_iii_iv;
    } else if (batch < bgf - beq) {
        out.regime = Regime::iii;
    } else if (near(batch, bgf)) {
        out.regime = Regime::boundary_iv_v;
    } else {
        out.regime = batch < bgf ? Regime::iv : Regime::v;
    }
    if (beq > 0.0 && near(batch, 2.0 * beq)) out.flags.push_back("vi: LE(CC)=0");
    if (near(batch, 2.0 * (bgf - beq))) out.flags.push_back("LE(GF)=0");
    return out;
}

nlohmann::json regime_json(const LinearErrorReport& report, const RegimeClassification& cls) {
    nlohmann::json j;
    j["a"] = report.a;
    j["b"] = report.b;
    j["c"] = report.c;
    j["le_ncc"] = report.le_ncc;
    j["le_cc"] = report.le_cc;
    j["le_gf"] = report.le_gf;
    j["B"] = report.batch;
    j["T"] = report.horizon;
    j["B_eq"] = report.b_eq;
    if (report.b_gf) {
        j["B_gf"] = *report.b_gf;
        j["B_gf_minus_B_eq"] = *report.b_gf - report.b_eq;
    } else {
        j["B_gf"] = nullptr;
        j["B_gf_minus_B_eq"] = nullptr;
    }
    j["regime"] = to_string(cls.regime);
    j["ordering_worst_to_best"] = cls.ordering_text();
    j["flags"] = cls.flags;
    return j;
}

std::size_t steps_for(double T, double h) {
    if (!(h > 0.0) || !(T > 0.0)) throw std::invalid_argument("T and h must be positive");
    const double ratio = T / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("T/h must be a positive integer (T = " + format_double(T) +
                                    ", h = " + format_double(h) + ")");
    return static_cast<std::size_t>(n);
}

std::vector<SgdRiskEstimate> estimate_sgd_excess_risk(const risk::LinRegModel& model, std::size_t batch, double T,
                                                      double theta0, const std::vector<double>& h_list,
                                                      std::size_t replicas, std::uint64_t seed, unsigned threads) {
    if (model.dim() != 1) throw std::invalid_argument("weak-error harness requires d = 1");
    if (replicas == 0) throw std::invalid_argument("replica count must be >= 1");
    const double ts = model.theta_star()(0);
    const VectorXd x0 = VectorXd::Constant(1, theta0);
    const auto u = sgd::Schedule::constant();
    const StreamKey root = StreamKey(seed).child("weak-error");
    std::vector<SgdRiskEstimate> out;
    for (double h : h_list) {
        const std::size_t steps = steps_for(T, h);
        const StreamKey hk = root.child(std::bit_cast<std::uint64_t>(h));
        std::vector<double> values(replicas);
        parallel_for(replicas, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                Rng rng = hk.child(static_cast<std::uint64_t>(r)).rng();
                const double e = sgd::sgd_replacement_final(model, x0, h, batch, u, steps, rng)(0) - ts;
                values[r] = 0.5 * e * e;
            }
        });
        for (double v : values)
            if (!std::isfinite(v)) throw NumericError("SGD replica produced a non-finite iterate at h = " + format_double(h));
        out.push_back({h, steps, batch_means(values)});
    }
    return out;
}

WeakErrorCurve weak_error_from_estimates(const risk::LinRegModel& model, sme::SmeKind kind, std::size_t batch, double T,
                                         double theta0, const std::vector<SgdRiskEstimate>& estimates) {
    const auto kurt = model.feature_kurtosis();
    sme::ScalarParams p{model.kappa()(0, 0), model.sigma_eps(), batch, kurt ? *kurt : 2.0 * risk::b_eq(model) + 1.0};
    const double e0 = theta0 - model.theta_star()(0);
    const double re0 = 0.5 * e0 * e0;
    WeakErrorCurve curve;
    curve.kind = kind;
    curve.batch = batch;
    curve.horizon = T;
    for (const auto& est : estimates) {
        WeakErrorPoint pt;
        pt.h = est.h;
        pt.steps = est.steps;
        pt.replicas = est.excess.count;
        pt.sgd_mean = est.excess.mean;
        pt.std_error = est.excess.std_error;
        try {
            pt.closed_form = sme::expected_excess_risk(kind, p, est.h, T, re0);
            pt.signed_error = pt.sgd_mean - pt.closed_form;
            pt.weak_error = std::abs(pt.signed_error);
        } catch (const NumericError& err) {
            pt.valid = false;
            pt.closed_form = pt.signed_error = pt.weak_error = std::nan("");
            pt.note = err.what();
        }
        curve.points.push_back(pt);
    }
    return curve;
}

WeakErrorCurve weak_error_curve(const risk::LinRegModel& model, sme::SmeKind kind, std::size_t batch, double T,
                                double theta0, const std::vector<double>& h_list, std::size_t replicas,
                                std::uint64_t seed, unsigned threads) {
    const auto est = estimate_sgd_excess_risk(model, batch, T, theta0, h_list, replicas, seed, threads);
    return weak_error_from_estimates(model, kind, batch, T, theta0, est);
}

SlopeFit slope_fit(const std::vector<double>& h, const std::vector<double>& errors) {
    if (h.size() != errors.size()) throw std::invalid_argument("slope_fit: length mismatch");
    SlopeFit fit;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(errors[k] > 0.0) || !std::isfinite(errors[k]) || !(h[k] > 0.0)) {
            fit.warnings.push_back("excluded point h = " + format_double(h[k]) + " with error " + format_double(errors[k]));
            continue;
        }
        lx.push_back(std::log(h[k]));
        ly.push_back(std::log(errors[k]));
    }
    if (lx.size() < 2) throw std::invalid_argument("slope_fit: fewer than two usable points");
    if (lx.size() < 3) fit.warnings.push_back("slope fitted from only " + std::to_string(lx.size()) + " points");
    const auto ls = least_squares(lx, ly);
    fit.slope = ls.slope;
    fit.intercept = ls.intercept;
    fit.used = lx.size();
    return fit;
}

SlopeFit slope_fit(const WeakErrorCurve& curve) {
    std::vector<double> h, e;
    for (const auto& p : curve.points) {
        h.push_back(p.h);
        e.push_back(p.valid ? p.weak_error : std::nan(""));
    }
    return slope_fit(h, e);
}

CsvTable weak_error_table() { return CsvTable({"setting_id", "kind", "h", "weak_error", "stderr", "M"}); }

void append_weak_error_rows(CsvTable& table, const std::string& setting_id, const WeakErrorCurve& curve) {
    for (const auto& p : curve.points)
        table.add_row({setting_id, sme::to_string(curve.kind), p.h, p.weak_error, p.std_error,
                       static_cast<std::uint64_t>(p.replicas)});
}

}  // namespace smelab::analysis
