#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "trackfuse/errors.hpp"
#include "trackfuse/experiment.hpp"

using namespace trackfuse;

namespace {

ExperimentSpec parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigurationError& e) {
        return e.what();
    }
    return "";
}

ExperimentSpec short_scenario1() {
    ExperimentSpec spec;
    spec.select_scenario("scenario1");
    spec.scenario_config.duration = 25;
    for (auto& t : spec.scenario_config.targets) t.death = 25;
    spec.runs = 2;
    spec.payloads = {PayloadKind::Raw, PayloadKind::Type1, PayloadKind::Type2};
    return spec;
}

}  // namespace

TEST(Config, FullExample) {
    const ExperimentSpec spec = parse(R"(
# comment
[experiment]
scenario = custom
fusion = mda
payload = raw, type1
runs = 4
seed = 17
sweep = clutter_rate=5,10
workers = 2

[scenario]
duration = 30
region = -500, 500, -500, 500   ; trailing comment

[sensor]
position = 0, -600
range = 1500

[sensor]
position = 0, 600
boresight_deg = -90
half_angle_deg = 30

[target]
birth = 1
death = 30
state = 0, 0, 1, 1

[bp]
particles = 200
)");
    EXPECT_EQ(spec.scenario, "custom");
    EXPECT_EQ(spec.fusion, FusionKind::Mda);
    EXPECT_EQ(spec.payloads, (std::vector<PayloadKind>{PayloadKind::Raw, PayloadKind::Type1}));
    EXPECT_EQ(spec.runs, 4);
    EXPECT_EQ(spec.seed, 17u);
    EXPECT_EQ(spec.sweep_key, "clutter_rate");
    EXPECT_EQ(spec.sweep_values, (std::vector<double>{5.0, 10.0}));
    EXPECT_EQ(spec.workers, 2);
    ASSERT_EQ(spec.scenario_config.sensors.size(), 2u);
    // No boresight given: aimed at the region centre, i.e. straight up.
    EXPECT_NEAR(spec.scenario_config.sensors[0].boresight, std::numbers::pi / 2.0, 1e-12);
    EXPECT_NEAR(spec.scenario_config.sensors[0].half_angle, std::numbers::pi / 4.0, 1e-12);
    EXPECT_NEAR(spec.scenario_config.sensors[1].boresight, -std::numbers::pi / 2.0, 1e-12);
    EXPECT_NEAR(spec.scenario_config.sensors[1].half_angle, std::numbers::pi / 6.0, 1e-12);
    ASSERT_EQ(spec.scenario_config.targets.size(), 1u);
    EXPECT_EQ(spec.scenario_config.targets[0].initial(3), 1.0);
    EXPECT_EQ(spec.bp.num_particles, 200);
    EXPECT_EQ(spec.scenario_for(10.0).sensors[1].clutter_rate, 10.0);
}

TEST(Config, ScenarioPresetSelectsFusion) {
    EXPECT_EQ(parse("[experiment]\nscenario = scenario2\n").fusion, FusionKind::Bp);
    EXPECT_EQ(parse("[experiment]\nscenario = scenario1\n").fusion, FusionKind::Mda);
    EXPECT_EQ(parse("[experiment]\nfusion = bp\nscenario = scenario1\n").fusion, FusionKind::Bp);
}

TEST(Config, ErrorsCarryLineAndField) {
    const std::string e1 = error_of("[experiment]\nruns = ten\n");
    EXPECT_NE(e1.find("test.cfg:2"), std::string::npos) << e1;
    EXPECT_NE(e1.find("experiment.runs"), std::string::npos) << e1;

    const std::string e2 = error_of("[scenario]\n\nregion = 1, 2, 3\n");
    EXPECT_NE(e2.find("test.cfg:3"), std::string::npos) << e2;
    EXPECT_NE(e2.find("scenario.region"), std::string::npos) << e2;

    EXPECT_NE(error_of("[nonsense]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(error_of("[bp]\nfoo = 1\n").find("bp.foo"), std::string::npos);
    EXPECT_NE(error_of("runs = 3\n").find("outside of a section"), std::string::npos);
    EXPECT_NE(error_of("[experiment]\npayload = raw, type9\n").find("type9"), std::string::npos);
    EXPECT_NE(error_of("[scenario]\nlayout_seed = 3\n").find("scenario.layout_seed"), std::string::npos);
    // Validation after parsing names the field too.
    EXPECT_NE(error_of("[experiment]\npayload = info_filter\n").find("payload"), std::string::npos);
    EXPECT_NE(error_of("[experiment]\nscenario = scenario2\n[scenario]\npd = 1\n").find("pd"), std::string::npos);
}

TEST(Config, SweepParsing) {
    std::string key;
    std::vector<double> values;
    parse_sweep("pd=0.7,0.8, 0.99", key, values);
    EXPECT_EQ(key, "pd");
    EXPECT_EQ(values, (std::vector<double>{0.7, 0.8, 0.99}));
    EXPECT_THROW(parse_sweep("pd", key, values), ConfigurationError);
    EXPECT_THROW(parse_sweep("pd=0.7,x", key, values), ConfigurationError);
}

TEST(Experiment, CsvOutputIsDeterministic) {
    ExperimentSpec spec = short_scenario1();
    const ExperimentResult a = run_monte_carlo(spec);
    spec.workers = 2;
    const ExperimentResult b = run_monte_carlo(spec);
    const std::string curves = format_curves_csv(spec, a);
    EXPECT_EQ(curves, format_curves_csv(spec, b));
    EXPECT_EQ(format_comm_csv(spec, a), format_comm_csv(spec, b));
    EXPECT_EQ(curves.substr(0, curves.find('\n')), "scan,metric,sweep_value,payload,fusion,value");
    EXPECT_NE(curves.find(",none,type2,mda,"), std::string::npos);
}

TEST(Experiment, PayloadArmsShareMeasurements) {
    const ExperimentSpec spec = short_scenario1();
    const RunResult r = run_single(spec, 0.0, 0);
    ASSERT_EQ(r.arms.size(), 3u);
    EXPECT_LE(r.max_ospa_diff, 1e-8);
    for (std::size_t a = 1; a < r.arms.size(); ++a) {
        ASSERT_EQ(r.arms[a].ospa.size(), r.arms[0].ospa.size());
        for (std::size_t k = 0; k < r.arms[0].ospa.size(); ++k) {
            EXPECT_NEAR(r.arms[a].ospa[k], r.arms[0].ospa[k], 1e-8);
            EXPECT_EQ(r.arms[a].card_est[k], r.arms[0].card_est[k]);
        }
    }
    EXPECT_GT(r.bytes.at(PayloadKind::Raw), r.bytes.at(PayloadKind::Type1));
    EXPECT_GT(r.bytes.at(PayloadKind::Type1), r.bytes.at(PayloadKind::Type2));
}
