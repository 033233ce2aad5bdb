#include "smelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "smelab/core/csv.hpp"
#include "smelab/core/errors.hpp"
#include "smelab/core/parallel.hpp"
#include "smelab/epoched_noise.hpp"
#include "smelab/error_analysis.hpp"
#include "smelab/weak_limits.hpp"
#include "smelab/young_solver.hpp"

namespace smelab::cli {

using nlohmann::json;

namespace {

// Strict reader for one JSON object: typed lookups with defaults, unknown keys rejected.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                    throw ConfigError(where(key) + "expected a nonnegative integer");
            }
            out = v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + e.what());
        }
    }

    const json* sub(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!seen_.count(k)) throw ConfigError(where(k) + "unknown field");
        }
    }

    [[nodiscard]] std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    [[nodiscard]] std::string where(const std::string& key) const {
        const std::string p = key.empty() ? path_ : child(key);
        return "config field '" + (p.empty() ? std::string("<root>") : p) + "': ";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json model_json(const ModelSpec& m) {
    return {{"kappa", m.kappa},   {"theta_star", m.theta_star}, {"sigma_eps", m.sigma_eps},
            {"law", m.law},       {"lognormal_sigma", m.lognormal_sigma}, {"theta0", m.theta0},
            {"horizon", m.horizon}, {"batch", m.batch}};
}

ExperimentSpec setting(int nr, double T, double theta0, const std::string& law, double kappa, std::size_t batch) {
    ExperimentSpec s;
    s.name = "setting-" + std::to_string(nr);
    s.kind = ExperimentKind::regimes;
    s.model.kappa = kappa;
    s.model.theta_star = -1.0;
    s.model.sigma_eps = 1.0;
    s.model.law = law;
    s.model.theta0 = theta0;
    s.model.horizon = T;
    s.model.batch = batch;
    s.replicas = 1000000;
    s.seed = static_cast<std::uint64_t>(nr);
    s.output = "out/" + s.name;
    return s;
}

class Writer {
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void emit(const std::string& file, const std::string& contents) {
        write_text_file(dir_ / file, contents);
        outputs_.push_back({file, fnv1a_hex(contents), contents.size()});
    }

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }
    [[nodiscard]] const std::vector<OutputFile>& outputs() const { return outputs_; }

private:
    std::filesystem::path dir_;
    std::vector<OutputFile> outputs_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void run_regimes(const ExperimentSpec& s, Writer& w) {
    const auto model = s.model.model();
    const auto q = model.objective();
    const VectorXd theta0 = VectorXd::Constant(1, s.model.theta0);
    const auto batch = static_cast<double>(s.model.batch);
    const auto report =
        analysis::linear_error_terms(q, theta0, s.model.horizon, batch, risk::b_eq(model), model.sigma_eps());
    const auto cls = analysis::classify_regime(batch, report);
    json j = analysis::regime_json(report, cls);
    j["setting"] = s.name;
    w.emit("regimes.json", dump(j));
}

void run_weak_error(const ExperimentSpec& s, Writer& w) {
    const auto model = s.model.model();
    const auto est = analysis::estimate_sgd_excess_risk(model, s.model.batch, s.model.horizon, s.model.theta0,
                                                        s.h_list, s.replicas, s.seed, s.threads);
    auto table = analysis::weak_error_table();
    json slopes = json::object();
    for (const auto& k : s.sme_kinds) {
        const auto kind = sme::sme_kind_from_string(k);
        const auto curve =
            analysis::weak_error_from_estimates(model, kind, s.model.batch, s.model.horizon, s.model.theta0, est);
        analysis::append_weak_error_rows(table, s.name, curve);
        json entry;
        try {
            const auto fit = analysis::slope_fit(curve);
            entry = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"used", fit.used}, {"warnings", fit.warnings}};
        } catch (const std::invalid_argument& e) {
            entry = {{"slope", nullptr}, {"error", e.what()}};
        }
        std::vector<std::string> notes;
        for (const auto& p : curve.points)
            if (!p.valid) notes.push_back("h=" + format_double(p.h) + ": " + p.note);
        entry["invalid_points"] = notes;
        slopes[k] = entry;
    }
    json sgd = json::array();
    for (const auto& e : est)
        sgd.push_back({{"h", e.h}, {"steps", e.steps}, {"mean", e.excess.mean}, {"stderr", e.excess.std_error}});
    w.emit("weak_error.csv", table.str());
    w.emit("weak_error_summary.json", dump({{"setting", s.name}, {"slopes", slopes}, {"sgd_estimates", sgd}}));
}

void run_sgdo(const ExperimentSpec& s, Writer& w) {
    const auto model = s.model.model();
    young::SgdoSmeOptions o;
    o.n = s.sgdo.n;
    o.h = s.sgdo.h;
    o.beta = s.sgdo.beta;
    o.c = s.sgdo.c;
    o.scheme = noise::named_scheme_from_string(s.sgdo.scheme);
    o.epochs = s.sgdo.epochs;
    o.grid = s.sgdo.cells;
    o.seed = s.seed;
    o.theta0 = VectorXd::Constant(1, s.model.theta0);
    const auto rep = young::sgdo_sme_experiment(model, o);
    w.emit("sgdo_rate.csv", rep.to_csv().str());
    w.emit("sgdo_rate.json", dump(rep.summary()));
}

void run_permuton(const ExperimentSpec& s, Writer& w) {
    const auto copula = s.copula.copula();
    const std::size_t J = s.components;
    CsvTable table({"N", "replica", "ks", "bound"});
    json summary = json::array();
    for (std::size_t n : s.n_list) {
        std::vector<double> ks(s.replicas);
        parallel_for(s.replicas, s.threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                Rng rng = StreamKey(s.seed).child("permuton-check").child(static_cast<std::uint64_t>(n))
                              .child(static_cast<std::uint64_t>(r)).rng();
                perm::EmpiricalPermuton p(perm::sample_jpermutation(copula, n, J, rng), perm::EmpiricalMode::smoothed);
                if (J == 2) {
                    ks[r] = perm::ks_distance_pair(p, 0, 1, copula, 0, 1, 64);
                } else {
                    ks[r] = perm::ks_distance(
                        [&](std::span<const double> t) { return p.cdf(t); },
                        [&](std::span<const double> t) { return copula.eval(t); }, J, 64);
                }
            }
        });
        const double bound = 4.0 * static_cast<double>(J) * std::pow(static_cast<double>(n), -0.25);
        std::size_t within = 0;
        for (std::size_t r = 0; r < s.replicas; ++r) {
            table.add_row({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r), ks[r], bound});
            within += ks[r] <= bound ? 1 : 0;
        }
        std::vector<double> sorted = ks;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        summary.push_back({{"N", n}, {"median_ks", median}, {"bound", bound}, {"within_bound", within},
                           {"replicas", s.replicas}});
    }
    w.emit("permuton_ks.csv", table.str());
    w.emit("permuton_summary.json", dump({{"copula", copula.name()}, {"J", J}, {"per_N", summary}}));
}

void run_walk(const ExperimentSpec& s, Writer& w) {
    walks::CovarianceCheckOptions o;
    o.law = walks::increment_law_from_string(s.walk.increments);
    o.copula = s.copula.copula();
    o.n = s.walk.n;
    o.replicas = s.replicas;
    o.grid = s.walk.grid;
    o.i = s.walk.i;
    o.j = s.walk.j;
    o.seed = s.seed;
    o.threads = s.threads;
    const auto rep = walks::covariance_check(o);
    w.emit("walk_cov.csv", rep.to_csv().str());
    w.emit("walk_cov.json", dump({{"copula", rep.copula}, {"increments", rep.law}, {"N", rep.n},
                                  {"replicas", rep.replicas}, {"max_abs_z", rep.max_z()}}));
}

void run_bridge(const ExperimentSpec& s, Writer& w) {
    noise::BridgeFamilySpec spec;
    if (s.bridge.scheme == "copula")
        spec.scheme = s.copula.copula();
    else
        spec.scheme = noise::named_scheme_from_string(s.bridge.scheme);
    spec.epochs = s.bridge.epochs;
    spec.grid = s.bridge.cells;
    const noise::BridgeSampler sampler(spec);
    std::vector<noise::GridPath> paths(s.replicas);
    parallel_for(s.replicas, s.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            Rng rng = StreamKey(s.seed).child("bridge-cov").child(static_cast<std::uint64_t>(r)).rng();
            paths[r] = sampler.sample(1, rng);
        }
    });
    CsvTable table({"i", "j", "s", "t", "empirical_cov", "target", "stderr"});
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.epochs; ++i) {
        for (std::size_t j = i; j < spec.epochs; ++j) {
            const auto cc = noise::empirical_cross_covariance(paths, i, j, s.bridge.grid, s.bridge.grid);
            for (std::size_t a = 0; a < s.bridge.grid.size(); ++a) {
                for (std::size_t b = 0; b < s.bridge.grid.size(); ++b) {
                    const double target = noise::bridge_covariance(spec, i, j, s.bridge.grid[a], s.bridge.grid[b]);
                    const double se = cc.se(a, b);
                    const double diff = std::abs(cc.at(a, b) - target);
                    if (se > 0.0) worst = std::max(worst, diff / se);
                    table.add_row({static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), s.bridge.grid[a],
                                   s.bridge.grid[b], cc.at(a, b), target, se});
                }
            }
        }
    }
    w.emit("bridge_cov.csv", table.str());
    w.emit("bridge_cov.json", dump({{"scheme", s.bridge.scheme}, {"epochs", spec.epochs}, {"cells", spec.grid},
                                    {"replicas", s.replicas}, {"max_abs_z", worst}}));
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::weak_error: return "weak-error";
        case ExperimentKind::regimes: return "regimes";
        case ExperimentKind::sgdo_converge: return "sgdo-converge";
        case ExperimentKind::permuton_check: return "permuton-check";
        case ExperimentKind::shuffled_walk: return "shuffled-walk";
        case ExperimentKind::bridge_cov: return "bridge-cov";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::weak_error, ExperimentKind::regimes, ExperimentKind::sgdo_converge,
                   ExperimentKind::permuton_check, ExperimentKind::shuffled_walk, ExperimentKind::bridge_cov})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown experiment kind '" + name +
                      "' (expected weak-error, regimes, sgdo-converge, permuton-check, shuffled-walk or bridge-cov)");
}

risk::LinRegModel ModelSpec::model() const {
    const auto scalar = risk::scalar_law_from_string(law);
    return risk::LinRegModel::scalar(kappa, theta_star, sigma_eps, risk::ScalarIidFeatures{scalar, lognormal_sigma});
}

perm::Copula CopulaSpec::copula() const {
    if (kind == "comonotone") return perm::Copula::comonotone();
    if (kind == "independence") return perm::Copula::independence();
    if (kind == "countermonotone") return perm::Copula::countermonotone();
    if (kind == "flipflop_single") return perm::Copula::flipflop_single();
    if (kind == "flipflop_random") return perm::Copula::flipflop_random();
    if (kind == "archimedean") return perm::Copula::archimedean(perm::family_from_string(family), theta);
    throw ConfigError("config field 'copula.kind': unknown copula '" + kind + "'");
}

void ExperimentSpec::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError("config field '" + field + "': " + msg);
    };
    if (replicas < 2) fail("replicas", "must be at least 2");
    if (!(model.kappa > 0.0)) fail("model.kappa", "must be positive");
    if (!(model.sigma_eps >= 0.0)) fail("model.sigma_eps", "must be nonnegative");
    if (!(model.horizon > 0.0)) fail("model.horizon", "must be positive");
    if (model.batch == 0) fail("model.batch", "must be at least 1");
    try {
        (void)model.model();
    } catch (const std::invalid_argument& e) {
        fail("model", e.what());
    }
    if (kind == ExperimentKind::weak_error) {
        if (h_list.empty()) fail("h_list", "must not be empty");
        for (double h : h_list) {
            if (!(h > 0.0 && h < 1.0)) fail("h_list", "every h must lie in (0, 1), got " + format_double(h));
            try {
                (void)analysis::steps_for(model.horizon, h);
            } catch (const std::invalid_argument& e) {
                fail("h_list", e.what());
            }
        }
        if (sme_kinds.empty()) fail("sme_kinds", "must not be empty");
        for (const auto& k : sme_kinds) {
            try {
                (void)sme::sme_kind_from_string(k);
            } catch (const std::invalid_argument& e) {
                fail("sme_kinds", e.what());
            }
        }
    }
    if (kind == ExperimentKind::permuton_check || kind == ExperimentKind::shuffled_walk ||
        (kind == ExperimentKind::bridge_cov && bridge.scheme == "copula")) {
        try {
            (void)copula.copula();
        } catch (const std::invalid_argument& e) {
            fail("copula", e.what());
        }
    }
    if (kind == ExperimentKind::permuton_check) {
        if (n_list.empty()) fail("n_list", "must not be empty");
        for (auto n : n_list)
            if (n == 0) fail("n_list", "N must be positive");
        if (components < 2) fail("components", "must be at least 2");
    }
    if (kind == ExperimentKind::shuffled_walk) {
        if (walk.n == 0) fail("walk.n", "must be positive");
        try {
            (void)walks::increment_law_from_string(walk.increments);
        } catch (const std::invalid_argument& e) {
            fail("walk.increments", e.what());
        }
        for (double g : walk.grid)
            if (!(g >= 0.0 && g <= 1.0)) fail("walk.grid", "points must lie in [0, 1]");
    }
    if (kind == ExperimentKind::bridge_cov) {
        if (bridge.epochs == 0) fail("bridge.epochs", "must be positive");
        if (bridge.cells < 2) fail("bridge.cells", "must be at least 2");
        if (bridge.scheme != "copula") {
            try {
                (void)noise::named_scheme_from_string(bridge.scheme);
            } catch (const std::invalid_argument& e) {
                fail("bridge.scheme", e.what());
            }
        }
        for (double g : bridge.grid) {
            if (!(g >= 0.0 && g <= 1.0)) fail("bridge.grid", "points must lie in [0, 1]");
            const double k = g * static_cast<double>(bridge.cells);
            if (std::abs(k - std::round(k)) > 1e-9) fail("bridge.grid", format_double(g) + " is not a multiple of 1/cells");
        }
    }
    if (kind == ExperimentKind::sgdo_converge) {
        if (!(sgdo.beta > 0.0 && sgdo.beta < 1.0)) fail("sgdo.beta", "must lie in (0, 1)");
        if (!(sgdo.c > 0.0)) fail("sgdo.c", "must be positive");
        if (!(sgdo.h > 0.0)) fail("sgdo.h", "must be positive");
        if (sgdo.n == 0) fail("sgdo.N", "must be positive");
        if (sgdo.epochs == 0) fail("sgdo.epochs", "must be positive");
        if (sgdo.cells < 2) fail("sgdo.cells", "must be at least 2");
        try {
            (void)noise::named_scheme_from_string(sgdo.scheme);
        } catch (const std::invalid_argument& e) {
            fail("sgdo.scheme", e.what());
        }
    }
}

json to_json(const ExperimentSpec& s) {
    json j;
    j["name"] = s.name;
    j["kind"] = to_string(s.kind);
    j["model"] = model_json(s.model);
    j["h_list"] = s.h_list;
    j["n_list"] = s.n_list;
    j["sme_kinds"] = s.sme_kinds;
    j["replicas"] = s.replicas;
    j["seed"] = s.seed;
    j["threads"] = s.threads;
    j["output"] = s.output;
    j["copula"] = {{"kind", s.copula.kind}, {"family", s.copula.family}, {"theta", s.copula.theta}};
    j["components"] = s.components;
    j["walk"] = {{"increments", s.walk.increments}, {"N", s.walk.n}, {"grid", s.walk.grid}, {"i", s.walk.i},
                 {"j", s.walk.j}};
    j["bridge"] = {{"scheme", s.bridge.scheme}, {"epochs", s.bridge.epochs}, {"cells", s.bridge.cells},
                   {"grid", s.bridge.grid}};
    j["sgdo"] = {{"N", s.sgdo.n},           {"h", s.sgdo.h},          {"beta", s.sgdo.beta},  {"c", s.sgdo.c},
                 {"scheme", s.sgdo.scheme}, {"epochs", s.sgdo.epochs}, {"cells", s.sgdo.cells}};
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec s;
    Reader r(j, "");
    r.get("name", s.name);
    std::string kind = to_string(s.kind);
    r.get("kind", kind);
    s.kind = experiment_kind_from_string(kind);
    r.get("h_list", s.h_list);
    r.get("n_list", s.n_list);
    r.get("sme_kinds", s.sme_kinds);
    r.get("replicas", s.replicas);
    r.get("seed", s.seed);
    r.get("threads", s.threads);
    r.get("output", s.output);
    r.get("components", s.components);
    if (const json* m = r.sub("model")) {
        Reader mr(*m, "model");
        mr.get("kappa", s.model.kappa);
        mr.get("theta_star", s.model.theta_star);
        mr.get("sigma_eps", s.model.sigma_eps);
        mr.get("law", s.model.law);
        mr.get("lognormal_sigma", s.model.lognormal_sigma);
        mr.get("theta0", s.model.theta0);
        mr.get("horizon", s.model.horizon);
        mr.get("batch", s.model.batch);
        mr.finish();
    }
    if (const json* c = r.sub("copula")) {
        Reader cr(*c, "copula");
        cr.get("kind", s.copula.kind);
        cr.get("family", s.copula.family);
        cr.get("theta", s.copula.theta);
        cr.finish();
    }
    if (const json* wj = r.sub("walk")) {
        Reader wr(*wj, "walk");
        wr.get("increments", s.walk.increments);
        wr.get("N", s.walk.n);
        wr.get("grid", s.walk.grid);
        wr.get("i", s.walk.i);
        wr.get("j", s.walk.j);
        wr.finish();
    }
    if (const json* b = r.sub("bridge")) {
        Reader br(*b, "bridge");
        br.get("scheme", s.bridge.scheme);
        br.get("epochs", s.bridge.epochs);
        br.get("cells", s.bridge.cells);
        br.get("grid", s.bridge.grid);
        br.finish();
    }
    if (const json* g = r.sub("sgdo")) {
        Reader gr(*g, "sgdo");
        gr.get("N", s.sgdo.n);
        gr.get("h", s.sgdo.h);
        gr.get("beta", s.sgdo.beta);
        gr.get("c", s.sgdo.c);
        gr.get("scheme", s.sgdo.scheme);
        gr.get("epochs", s.sgdo.epochs);
        gr.get("cells", s.sgdo.cells);
        gr.finish();
    }
    r.finish();
    return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return spec_from_json(j);
}

std::vector<std::string> preset_names() {
    return {"setting-1",        "setting-2",        "setting-3",     "setting-4",      "setting-5",
            "setting-6",        "sgdo-ss",          "sgdo-rr",       "permuton-clayton", "permuton-gumbel",
            "walk-comonotone",  "walk-independence", "walk-countermonotone", "bridge-ss", "bridge-rr",
            "bridge-flipflop"};
}

ExperimentSpec preset(const std::string& name) {
    // Scalar settings: y = -x + eps, Var eps = 1, columns (T, theta0, law, kappa, B).
    if (name == "setting-1") return setting(1, 0.5, 0.0, "exponential", 10.0, 1);
    if (name == "setting-2") return setting(2, 0.5, 0.0, "gaussian", 1.0, 1);
    if (name == "setting-3") return setting(3, 2.0, 0.0, "gaussian", 1.0, 4);
    if (name == "setting-4") return setting(4, 0.5, 0.0, "exponential", 1.0, 8);
    if (name == "setting-5") return setting(5, 0.5, 0.0, "gaussian", 1.0, 4);
    if (name == "setting-6") return setting(6, 0.5, -0.9, "gaussian", 1.0, 2);

    ExperimentSpec s;
    s.name = name;
    s.output = "out/" + name;
    if (name == "sgdo-ss" || name == "sgdo-rr") {
        s.kind = ExperimentKind::sgdo_converge;
        s.model.kappa = 1.0;
        s.model.theta_star = 1.0;
        s.model.theta0 = 0.0;
        s.sgdo.scheme = name == "sgdo-ss" ? "SS" : "RR";
        s.seed = 1;
        return s;
    }
    if (name == "permuton-clayton" || name == "permuton-gumbel") {
        s.kind = ExperimentKind::permuton_check;
        s.copula = {"archimedean", name == "permuton-clayton" ? "clayton" : "gumbel", 2.0};
        s.replicas = 100;
        s.seed = 4;
        return s;
    }
    if (name == "walk-comonotone" || name == "walk-independence" || name == "walk-countermonotone") {
        s.kind = ExperimentKind::shuffled_walk;
        s.copula.kind = name.substr(5);
        s.replicas = 20000;
        s.seed = 6;
        return s;
    }
    if (name == "bridge-ss" || name == "bridge-rr" || name == "bridge-flipflop") {
        s.kind = ExperimentKind::bridge_cov;
        s.bridge.scheme = name == "bridge-ss" ? "SS" : name == "bridge-rr" ? "RR" : "flipflop_single";
        s.replicas = 20000;
        s.seed = 7;
        return s;
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

json RunManifest::to_json() const {
    json files = json::array();
    for (const auto& o : outputs) files.push_back({{"file", o.file}, {"fnv1a", o.fnv1a}, {"bytes", o.bytes}});
    return {{"spec", spec}, {"version", version}, {"wall_clock_seconds", wall_clock_seconds}, {"outputs", files}};
}

RunManifest run(const ExperimentSpec& spec) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    Writer w(spec.output);
    switch (spec.kind) {
        case ExperimentKind::weak_error: run_weak_error(spec, w); break;
        case ExperimentKind::regimes: run_regimes(spec, w); break;
        case ExperimentKind::sgdo_converge: run_sgdo(spec, w); break;
        case ExperimentKind::permuton_check: run_permuton(spec, w); break;
        case ExperimentKind::shuffled_walk: run_walk(spec, w); break;
        case ExperimentKind::bridge_cov: run_bridge(spec, w); break;
    }
    RunManifest m;
    m.spec = to_json(spec);
    m.outputs = w.outputs();
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(w.dir() / "manifest.json", dump(m.to_json()));
    return m;
}

}  // namespace smelab::cli
