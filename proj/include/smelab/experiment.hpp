#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "smelab/permutons.hpp"
#include "smelab/risk_models.hpp"

namespace smelab::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ExperimentKind { weak_error, regimes, sgdo_converge, permuton_check, shuffled_walk, bridge_cov };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

// Scalar linear regression y = theta* x + eps started at theta0 and run to the horizon.
struct ModelSpec {
    double kappa = 1.0;
    double theta_star = -1.0;
    double sigma_eps = 1.0;
    std::string law = "gaussian";
    double lognormal_sigma = 1.0;
    double theta0 = 0.0;
    double horizon = 0.5;
    std::size_t batch = 1;

    [[nodiscard]] risk::LinRegModel model() const;
};

struct CopulaSpec {
    std::string kind = "independence";  // comonotone, independence, countermonotone, flipflop_single,
                                        // flipflop_random, archimedean
    std::string family = "clayton";
    double theta = 2.0;

    [[nodiscard]] perm::Copula copula() const;
};

struct WalkSpec {
    std::string increments = "gaussian";
    std::size_t n = 2048;
    std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
    std::size_t i = 0;
    std::size_t j = 1;
};

struct BridgeSpec {
    std::string scheme = "SS";  // a named scheme, or "copula" to use the copula section
    std::size_t epochs = 2;
    std::size_t cells = 20;
    std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
};

struct SgdoSpec {
    std::size_t n = 1000;
    double h = 1e-3;
    double beta = 0.75;
    double c = 1.0;
    std::string scheme = "SS";
    std::size_t epochs = 10000;
    std::size_t cells = 256;
};

struct ExperimentSpec {
    std::string name = "custom";
    ExperimentKind kind = ExperimentKind::regimes;
    ModelSpec model;
    std::vector<double> h_list{0.5, 0.25, 0.1, 0.05};
    std::vector<std::size_t> n_list{64, 256, 1024, 4096};
    std::vector<std::string> sme_kinds{"GF", "CC", "NCC", "SGF2"};
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string output = "out";
    CopulaSpec copula;
    std::size_t components = 2;
    WalkSpec walk;
    BridgeSpec bridge;
    SgdoSpec sgdo;

    // Throws ConfigError with the offending field.
    void validate() const;
};

nlohmann::json to_json(const ExperimentSpec& spec);
// Missing fields take their defaults; unknown fields and wrong types raise ConfigError.
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
ExperimentSpec preset(const std::string& name);

struct OutputFile {
    std::string file;
    std::string fnv1a;
    std::size_t bytes = 0;
};

struct RunManifest {
    nlohmann::json spec;
    std::string version = kArtifactVersion;
    double wall_clock_seconds = 0.0;
    std::vector<OutputFile> outputs;

    [[nodiscard]] nlohmann::json to_json() const;
};

/**
 * Runs the experiment, writes its CSV/JSON outputs into spec.output and a
 * manifest.json listing them with checksums.
 */
RunManifest run(const ExperimentSpec& spec);

}  // namespace smelab::cli
