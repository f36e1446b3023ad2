#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trackfuse/bp.hpp"
#include "trackfuse/mda.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/sim.hpp"

namespace trackfuse {

enum class FusionKind { Mda, Bp };

std::string to_string(FusionKind kind);
FusionKind parse_fusion(const std::string& name);

struct ExperimentSpec {
    std::string scenario = "scenario1";  // scenario1, scenario2 or custom
    ScenarioConfig scenario_config = ScenarioConfig::scenario1();
    FusionKind fusion = FusionKind::Mda;
    std::vector<PayloadKind> payloads = {PayloadKind::Raw, PayloadKind::Type2};
    std::string sweep_key;              // "", "clutter_rate" or "pd"
    std::vector<double> sweep_values;
    int runs = 10;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    int workers = 1;
    MdaConfig mda;
    BpConfig bp;
    LocalTrackerConfig local;
    OspaParams ospa;

    /// Picks the preset scenario and the fusion default that goes with it.
    void select_scenario(const std::string& name);
    /// Scenario with the sweep value applied (value ignored without a sweep).
    ScenarioConfig scenario_for(double sweep_value) const;
    /// Sweep values, or a single placeholder when nothing is swept.
    std::vector<double> effective_sweep() const;
    /// Throws ConfigurationError naming the offending field.
    void validate() const;
};

/// Parses the line-oriented configuration format (see README). Errors carry the
/// source name, line number and field.
ExperimentSpec parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentSpec load_config(const std::string& path);

/// Parses "key=v1,v2,...".
void parse_sweep(const std::string& text, std::string& key, std::vector<double>& values);

/// Per-scan outputs of one fusion arm in one run.
struct ArmResult {
    PayloadKind payload = PayloadKind::Raw;
    std::vector<double> ospa;
    std::vector<double> ospa2;
    std::vector<int> card_est;
};

struct RunResult {
    double sweep_value = 0.0;
    int run = 0;
    std::vector<int> card_true;
    std::vector<ArmResult> arms;
    std::map<PayloadKind, std::uint64_t> bytes;  // summed over scans and sensors
    double max_ospa_diff = 0.0;    // largest |OSPA_arm - OSPA_first| over scans
    double max_trace_diff = 0.0;   // BP only: largest relative trace difference between arms
};

/// One Monte Carlo run: truth, measurements and local trackers are shared by all
/// payload arms; each arm has its own fusion state and an identical RNG stream.
RunResult run_single(const ExperimentSpec& spec, double sweep_value, int run, bool compare_traces = false);

struct ExperimentResult {
    std::vector<RunResult> runs;  // ordered by (sweep index, run)
};

/// Runs every (sweep value, run) pair, spread over spec.workers threads.
ExperimentResult run_monte_carlo(const ExperimentSpec& spec, bool compare_traces = false);

/// curves.csv, comm.csv and summary.txt as strings.
std::string format_curves_csv(const ExperimentSpec& spec, const ExperimentResult& result);
std::string format_comm_csv(const ExperimentSpec& spec, const ExperimentResult& result);
std::string format_summary(const ExperimentSpec& spec, const ExperimentResult& result);

/// Runs the experiment and writes the three files into spec.output_dir.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Property batteries: "lemmas", "solvers", "bp-exactness", "metrics".
/// Prints one line per property and returns true when all pass.
bool run_checks(const std::string& suite, std::ostream& out);

}  // namespace trackfuse
