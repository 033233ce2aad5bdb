#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smelab/core/errors.hpp"
#include "smelab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulations for SGD, its modified equations, shuffling permutons and epoched noise"};
    std::string config, preset, out, kind;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::optional<unsigned> threads;
    bool list = false;
    bool dry_run = false;
    auto* cfg = app.add_option("--config", config, "JSON experiment specification");
    auto* pre = app.add_option("--preset", preset, "Named preset (see --list-presets)");
    cfg->excludes(pre);
    app.add_option("--seed", seed, "64-bit master seed (overrides the spec)");
    app.add_option("--out", out, "Output directory (overrides the spec)");
    app.add_option("--replicas", replicas, "Monte Carlo replicas M (overrides the spec)");
    app.add_option("--threads", threads, "Worker threads, 0 = all cores");
    app.add_option("--kind", kind, "Experiment kind (overrides the spec)");
    app.add_flag("--list-presets", list, "Print preset names and exit");
    app.add_flag("--print-spec", dry_run, "Print the resolved spec as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (list) {
            for (const auto& n : smelab::cli::preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (config.empty() && preset.empty()) throw smelab::ConfigError("one of --config or --preset is required");
        auto spec = config.empty() ? smelab::cli::preset(preset) : smelab::cli::load_spec(config);
        if (seed) spec.seed = *seed;
        if (!out.empty()) spec.output = out;
        if (replicas) spec.replicas = *replicas;
        if (threads) spec.threads = *threads;
        if (!kind.empty()) spec.kind = smelab::cli::experiment_kind_from_string(kind);
        if (dry_run) {
            std::cout << smelab::cli::to_json(spec).dump(2) << "\n";
            return 0;
        }
        const auto manifest = smelab::cli::run(spec);
        for (const auto& o : manifest.outputs) std::cout << spec.output << "/" << o.file << "  " << o.fnv1a << "\n";
        return 0;
    } catch (const smelab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const smelab::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
