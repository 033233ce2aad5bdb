#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "smelab/core/errors.hpp"
#include "smelab/experiment.hpp"

using namespace smelab;
using namespace smelab::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("smelab_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json run_regimes_for(const std::string& preset_name) {
    auto s = preset(preset_name);
    s.output = scratch(preset_name).string();
    run(s);
    return json::parse(slurp(std::filesystem::path(s.output) / "regimes.json"));
}

}  // namespace

TEST(Experiment, JsonRoundTripForEveryPreset) {
    for (const auto& name : preset_names()) {
        const auto s = preset(name);
        const json j = to_json(s);
        const auto back = spec_from_json(j);
        EXPECT_EQ(to_json(back), j) << name;
        EXPECT_NO_THROW(s.validate()) << name;
    }
}

TEST(Experiment, MissingFieldsTakeDefaults) {
    const auto s = spec_from_json(json{{"kind", "regimes"}});
    const ExperimentSpec d;
    EXPECT_EQ(to_json(s), to_json(d));
}

TEST(Experiment, UnknownFieldsAndWrongTypesAreRejected) {
    auto expect_field = [](const json& j, const std::string& field) {
        try {
            (void)spec_from_json(j);
            ADD_FAILURE() << "accepted " << j.dump();
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    expect_field(json{{"replicaz", 10}}, "replicaz");
    expect_field(json{{"model", {{"kapa", 1.0}}}}, "kapa");
    expect_field(json{{"model", {{"kappa", "one"}}}}, "kappa");
    expect_field(json{{"replicas", -3}}, "replicas");
    expect_field(json{{"kind", "nonsense"}}, "nonsense");
    EXPECT_THROW(spec_from_json(json::array()), ConfigError);
}

TEST(Experiment, ValidationNamesTheField) {
    auto expect_field = [](ExperimentSpec s, const std::string& field) {
        try {
            s.validate();
            ADD_FAILURE() << "accepted invalid " << field;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
        }
    };
    ExperimentSpec s;
    s.model.kappa = -1.0;
    expect_field(s, "model.kappa");
    s = ExperimentSpec{};
    s.model.batch = 0;
    expect_field(s, "model.batch");
    s = ExperimentSpec{};
    s.kind = ExperimentKind::weak_error;
    s.h_list = {0.3};
    expect_field(s, "h_list");
    s.h_list = {1.5};
    expect_field(s, "h_list");
    s = ExperimentSpec{};
    s.kind = ExperimentKind::sgdo_converge;
    s.sgdo.beta = 1.0;
    expect_field(s, "sgdo.beta");
    s = ExperimentSpec{};
    s.kind = ExperimentKind::bridge_cov;
    s.bridge.grid = {0.33};
    expect_field(s, "bridge.grid");
    s = ExperimentSpec{};
    s.model.law = "cauchy";
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Experiment, UnknownPresetListsKnownOnes) {
    try {
        (void)preset("setting-9");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("setting-1"), std::string::npos);
    }
}

TEST(Experiment, SettingPresetsReproduceTable) {
    const auto s2 = run_regimes_for("setting-2");
    EXPECT_NEAR(s2["B_gf"].get<double>(), 2.85914, 5e-5);
    EXPECT_EQ(s2["regime"], "ii");
    const auto s1 = run_regimes_for("setting-1");
    EXPECT_NEAR(s1["B_gf"].get<double>(), 118.127, 5e-3);
    EXPECT_EQ(s1["regime"], "i");
    EXPECT_EQ(run_regimes_for("setting-3")["regime"], "iii");
    const auto s4 = run_regimes_for("setting-4");
    EXPECT_EQ(s4["regime"], "iv");
    bool flag = false;
    for (const auto& f : s4["flags"]) flag = flag || f.get<std::string>().find("vi") != std::string::npos;
    EXPECT_TRUE(flag);
    EXPECT_EQ(run_regimes_for("setting-5")["regime"], "v");
    EXPECT_EQ(run_regimes_for("setting-6")["regime"], "iii");
}

TEST(Experiment, ReRunsAreByteIdentical) {
    auto s = preset("bridge-rr");
    s.replicas = 200;
    const auto dir_a = scratch("rerun_a");
    s.output = dir_a.string();
    const auto a = run(s);
    s.output = scratch("rerun_b").string();
    s.threads = 3;
    const auto b = run(s);
    ASSERT_EQ(a.outputs.size(), b.outputs.size());
    for (std::size_t k = 0; k < a.outputs.size(); ++k) {
        EXPECT_EQ(a.outputs[k].file, b.outputs[k].file);
        EXPECT_EQ(a.outputs[k].fnv1a, b.outputs[k].fnv1a);
        EXPECT_EQ(slurp(dir_a / a.outputs[k].file),
                  slurp(std::filesystem::path(s.output) / b.outputs[k].file));
    }
}

TEST(Experiment, ManifestListsOutputsWithChecksums) {
    auto s = preset("setting-2");
    s.output = scratch("manifest").string();
    const auto m = run(s);
    const auto j = json::parse(slurp(std::filesystem::path(s.output) / "manifest.json"));
    EXPECT_EQ(j["version"], kArtifactVersion);
    EXPECT_EQ(j["spec"], to_json(s));
    ASSERT_EQ(j["outputs"].size(), m.outputs.size());
    EXPECT_EQ(j["outputs"][0]["file"], "regimes.json");
    EXPECT_EQ(j["outputs"][0]["bytes"].get<std::size_t>(),
              std::filesystem::file_size(std::filesystem::path(s.output) / "regimes.json"));
    EXPECT_EQ(m.outputs[0].fnv1a.size(), 16u);
}

TEST(Experiment, SmallWeakErrorRunWritesTable) {
    auto s = preset("setting-2");
    s.kind = ExperimentKind::weak_error;
    s.h_list = {0.25, 0.125};
    s.replicas = 2000;
    s.output = scratch("weak").string();
    const auto m = run(s);
    const auto csv = slurp(std::filesystem::path(s.output) / "weak_error.csv");
    EXPECT_FALSE(csv.empty());
    const auto summary = json::parse(slurp(std::filesystem::path(s.output) / "weak_error_summary.json"));
    EXPECT_EQ(summary["setting"], "setting-2");
    EXPECT_EQ(m.outputs.size(), 2u);
}

TEST(Experiment, LoadSpecReportsBadJson) {
    const auto p = scratch("bad.json");
    {
        std::ofstream out(p);
        out << "{ not json";
    }
    EXPECT_THROW(load_spec(p), ConfigError);
    EXPECT_THROW(load_spec(scratch("missing.json")), std::exception);
}
