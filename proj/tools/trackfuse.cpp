#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "trackfuse/errors.hpp"
#include "trackfuse/experiment.hpp"

using namespace trackfuse;

namespace {

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigurationError(where + ": expected a nonnegative integer seed, got '" + text + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multisensor track association and fusion experiments"};
    app.require_subcommand(1);

    std::string config_path, scenario, fusion, payload, sweep, out_dir;
    int runs = 0, workers = 0;
    std::string seed;
    CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write CSV outputs");
    run->add_option("--config", config_path, "Experiment configuration file");
    run->add_option("--scenario", scenario, "scenario1, scenario2 or custom");
    run->add_option("--fusion", fusion, "mda or bp");
    run->add_option("--payload", payload, "Comma-separated payload arms (raw, type1, type2)");
    run->add_option("--runs", runs, "Monte Carlo runs");
    run->add_option("--seed", seed, "Base seed");
    run->add_option("--sweep", sweep, "Swept parameter, e.g. clutter_rate=10,20,30,40 or pd=0.7,0.9");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--workers", workers, "Worker threads");

    std::string suite;
    CLI::App* check = app.add_subcommand("check", "Run a property battery");
    check->add_option("suite", suite, "lemmas, solvers, bp-exactness, metrics or all")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (check->parsed()) {
            return run_checks(suite, std::cout) ? 0 : 1;
        }
        ExperimentSpec spec;
        if (!config_path.empty()) {
            spec = load_config(config_path);
        }
        if (!scenario.empty()) spec.select_scenario(scenario);
        if (const char* env = std::getenv("TRACKFUSE_SEED")) spec.seed = parse_seed(env, "TRACKFUSE_SEED");
        if (const char* env = std::getenv("TRACKFUSE_OUT")) spec.output_dir = env;
        if (!fusion.empty()) spec.fusion = parse_fusion(fusion);
        if (!payload.empty()) {
            spec.payloads.clear();
            std::stringstream ss(payload);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::erase_if(item, [](unsigned char c) { return std::isspace(c); });
                spec.payloads.push_back(parse_payload(item));
            }
        }
        if (runs != 0) spec.runs = runs;
        if (!seed.empty()) spec.seed = parse_seed(seed, "--seed");
        if (!sweep.empty()) parse_sweep(sweep, spec.sweep_key, spec.sweep_values);
        if (!out_dir.empty()) spec.output_dir = out_dir;
        if (workers != 0) spec.workers = workers;

        run_experiment(spec);
        std::ifstream summary(spec.output_dir + "/summary.txt");
        std::cout << summary.rdbuf();
        return 0;
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
