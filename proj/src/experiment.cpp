#include "trackfuse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "trackfuse/errors.hpp"

namespace trackfuse {

std::string to_string(FusionKind kind) {
    return kind == FusionKind::Mda ? "mda" : "bp";
}

FusionKind parse_fusion(const std::string& name) {
    if (name == "mda") return FusionKind::Mda;
    if (name == "bp") return FusionKind::Bp;
    throw ConfigurationError("unknown fusion kind '" + name + "' (expected mda or bp)");
}

void ExperimentSpec::select_scenario(const std::string& name) {
    if (name == "scenario1") {
        scenario_config = ScenarioConfig::scenario1();
        fusion = FusionKind::Mda;
    } else if (name == "scenario2") {
        scenario_config = ScenarioConfig::scenario2();
        fusion = FusionKind::Bp;
    } else if (name == "custom") {
        scenario_config = ScenarioConfig{};
    } else {
        throw ConfigurationError("unknown scenario '" + name + "' (expected scenario1, scenario2 or custom)");
    }
    scenario = name;
}

ScenarioConfig ExperimentSpec::scenario_for(double sweep_value) const {
    ScenarioConfig c = scenario_config;
    c.seed = seed;
    if (sweep_key == "clutter_rate") c.set_clutter_rate(sweep_value);
    if (sweep_key == "pd") c.set_detection_prob(sweep_value);
    return c;
}

std::vector<double> ExperimentSpec::effective_sweep() const {
    if (sweep_key.empty()) return {0.0};
    return sweep_values;
}

void ExperimentSpec::validate() const {
    if (runs < 1) throw ConfigurationError("field 'runs': must be at least 1");
    if (workers < 1) throw ConfigurationError("field 'workers': must be at least 1");
    if (payloads.empty()) throw ConfigurationError("field 'payload': at least one payload is required");
    for (PayloadKind p : payloads) {
        if (p == PayloadKind::InfoFilter) {
            throw ConfigurationError("field 'payload': info_filter is an accounting-only kind, not a fusion input");
        }
    }
    if (!sweep_key.empty()) {
        if (sweep_key != "clutter_rate" && sweep_key != "pd") {
            throw ConfigurationError("field 'sweep': unknown parameter '" + sweep_key + "' (expected clutter_rate or pd)");
        }
        if (sweep_values.empty()) throw ConfigurationError("field 'sweep': no values");
        for (double v : sweep_values) {
            if (!(v > 0.0)) throw ConfigurationError("field 'sweep': values must be positive");
            if (sweep_key == "pd" && v > 1.0) throw ConfigurationError("field 'sweep': pd values must lie in (0, 1]");
        }
    }
    scenario_config.validate();
    for (const auto& s : scenario_config.sensors) {
        if (s.detection_prob >= 1.0 && fusion == FusionKind::Bp) {
            // beta(0) can vanish for a certain track, which the message ratios cannot absorb.
            throw ConfigurationError("field 'pd': bp fusion needs pd < 1");
        }
    }
    local.validate();
    bp.validate();
    ospa.validate();
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

struct ParseContext {
    std::string source;
    int line = 0;
    std::string field;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigurationError(source + ":" + std::to_string(line) + ": field '" + field + "': " + what);
    }

    double number(const std::string& text) const {
        double v = 0.0;
        const auto* end = text.data() + text.size();
        const auto res = std::from_chars(text.data(), end, v);
        if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
            fail("expected a number, got '" + text + "'");
        }
        return v;
    }

    int integer(const std::string& text) const {
        int v = 0;
        const auto* end = text.data() + text.size();
        const auto res = std::from_chars(text.data(), end, v);
        if (text.empty() || res.ec != std::errc() || res.ptr != end) fail("expected an integer, got '" + text + "'");
        return v;
    }

    std::vector<double> numbers(const std::string& text, std::size_t expected = 0) const {
        std::vector<double> out;
        for (const auto& part : split(text, ',')) out.push_back(number(part));
        if (expected != 0 && out.size() != expected) {
            fail("expected " + std::to_string(expected) + " comma-separated numbers");
        }
        return out;
    }
};

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void parse_sweep(const std::string& text, std::string& key, std::vector<double>& values) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigurationError("sweep '" + text + "': expected key=v1,v2,...");
    key = trim(text.substr(0, eq));
    ParseContext ctx{"--sweep", 0, key};
    values = ctx.numbers(trim(text.substr(eq + 1)));
}

ExperimentSpec parse_config(std::istream& in, const std::string& source) {
    ExperimentSpec spec;
    std::string section;
    bool fusion_set = false;
    bool sensors_replaced = false;
    bool targets_replaced = false;
    std::vector<bool> boresight_given;
    ParseContext ctx{source, 0, ""};
    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                ctx.field = line;
                ctx.fail("unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            ctx.field = section;
            if (section == "sensor") {
                if (!sensors_replaced) spec.scenario_config.sensors.clear();
                sensors_replaced = true;
                SensorSpec s;
                s.half_angle = 45.0 * kDeg;
                spec.scenario_config.sensors.push_back(s);
                boresight_given.push_back(false);
            } else if (section == "target") {
                if (!targets_replaced) spec.scenario_config.targets.clear();
                targets_replaced = true;
                spec.scenario_config.targets.push_back(TargetSpec{});
            } else if (section != "experiment" && section != "scenario" && section != "local" && section != "mda" &&
                       section != "bp" && section != "ospa") {
                ctx.fail("unknown section");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            ctx.field = line;
            ctx.fail("expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        ctx.field = section.empty() ? key : section + "." + key;
        if (section.empty()) ctx.fail("key outside of a section");

        ScenarioConfig& sc = spec.scenario_config;
        if (section == "experiment") {
            if (key == "scenario") {
                const FusionKind keep = spec.fusion;
                try {
                    spec.select_scenario(value);
                } catch (const ConfigurationError& e) {
                    ctx.fail(e.what());
                }
                if (fusion_set) spec.fusion = keep;
                sensors_replaced = targets_replaced = false;
            } else if (key == "fusion") {
                try {
                    spec.fusion = parse_fusion(value);
                } catch (const ConfigurationError& e) {
                    ctx.fail(e.what());
                }
                fusion_set = true;
            } else if (key == "payload") {
                spec.payloads.clear();
                for (const auto& p : split(value, ',')) {
                    try {
                        spec.payloads.push_back(parse_payload(p));
                    } catch (const InvalidInput& e) {
                        ctx.fail(e.what());
                    }
                }
            } else if (key == "runs") {
                spec.runs = ctx.integer(value);
            } else if (key == "seed") {
                const double s = ctx.number(value);
                if (s < 0.0 || s != std::floor(s)) ctx.fail("seed must be a nonnegative integer");
                spec.seed = static_cast<std::uint64_t>(s);
            } else if (key == "sweep") {
                try {
                    parse_sweep(value, spec.sweep_key, spec.sweep_values);
                } catch (const ConfigurationError& e) {
                    ctx.fail(e.what());
                }
            } else if (key == "out") {
                spec.output_dir = value;
            } else if (key == "workers") {
                spec.workers = ctx.integer(value);
            } else {
                ctx.fail("unknown key");
            }
        } else if (section == "scenario") {
            if (key == "duration") sc.duration = ctx.integer(value);
            else if (key == "dt") sc.dt = ctx.number(value);
            else if (key == "q") sc.q = ctx.number(value);
            else if (key == "sigma") sc.sigma = ctx.number(value);
            else if (key == "theta_range") {
                const auto v = ctx.numbers(value, 2);
                sc.theta_lo = v[0];
                sc.theta_hi = v[1];
            } else if (key == "vartheta_range") {
                const auto v = ctx.numbers(value, 2);
                sc.vartheta_lo = v[0];
                sc.vartheta_hi = v[1];
            } else if (key == "region") {
                const auto v = ctx.numbers(value, 4);
                sc.region_xmin = v[0];
                sc.region_xmax = v[1];
                sc.region_ymin = v[2];
                sc.region_ymax = v[3];
            } else if (key == "pd") {
                sc.set_detection_prob(ctx.number(value));
            } else if (key == "clutter_rate") {
                sc.set_clutter_rate(ctx.number(value));
            } else if (key == "layout_seed") {
                if (spec.scenario != "scenario2") ctx.fail("only meaningful for scenario2");
                const int s = ctx.integer(value);
                if (s < 0) ctx.fail("must be nonnegative");
                const auto keep = sc;
                sc = ScenarioConfig::scenario2(static_cast<std::uint64_t>(s));
                sc.duration = keep.duration;
            } else {
                ctx.fail("unknown key");
            }
        } else if (section == "sensor") {
            SensorSpec& s = sc.sensors.back();
            if (key == "position") {
                const auto v = ctx.numbers(value, 2);
                s.x = v[0];
                s.y = v[1];
            } else if (key == "boresight_deg") {
                s.boresight = ctx.number(value) * kDeg;
                boresight_given.back() = true;
            } else if (key == "half_angle_deg") {
                s.half_angle = ctx.number(value) * kDeg;
            } else if (key == "range") {
                s.range = ctx.number(value);
            } else if (key == "pd") {
                s.detection_prob = ctx.number(value);
            } else if (key == "clutter_rate") {
                s.clutter_rate = ctx.number(value);
            } else {
                ctx.fail("unknown key");
            }
        } else if (section == "target") {
            TargetSpec& t = sc.targets.back();
            if (key == "birth") t.birth = ctx.integer(value);
            else if (key == "death") t.death = ctx.integer(value);
            else if (key == "state") {
                const auto v = ctx.numbers(value, 4);
                t.initial = Vector::Map(v.data(), 4);
            } else {
                ctx.fail("unknown key");
            }
        } else if (section == "local") {
            if (key == "confirm_hits") spec.local.confirm_hits = ctx.integer(value);
            else if (key == "delete_misses") spec.local.delete_misses = ctx.integer(value);
            else if (key == "gate_prob") spec.local.gate_prob = ctx.number(value);
            else if (key == "max_speed") spec.local.max_speed = ctx.number(value);
            else if (key == "q") spec.local.motion = MotionModel::constant_velocity(sc.dt, ctx.number(value));
            else ctx.fail("unknown key");
        } else if (section == "mda") {
            if (key == "solver") {
                if (value == "exact") spec.mda.solver = SolverKind::Exact;
                else if (value == "relaxed") spec.mda.solver = SolverKind::Relaxed;
                else ctx.fail("expected exact or relaxed");
            } else if (key == "gate_prob") spec.mda.gate_prob = ctx.number(value);
            else if (key == "confirm_hits") spec.mda.confirm_hits = ctx.integer(value);
            else if (key == "delete_misses") spec.mda.delete_misses = ctx.integer(value);
            else if (key == "max_tuples") spec.mda.max_tuples = static_cast<std::size_t>(ctx.integer(value));
            else if (key == "q") spec.mda.motion = MotionModel::constant_velocity(sc.dt, ctx.number(value));
            else ctx.fail("unknown key");
        } else if (section == "bp") {
            if (key == "particles") spec.bp.num_particles = ctx.integer(value);
            else if (key == "iterations") spec.bp.iterations = ctx.integer(value);
            else if (key == "p_th") spec.bp.p_th = ctx.number(value);
            else if (key == "p_pr") spec.bp.p_pr = ctx.number(value);
            else if (key == "n_pr") spec.bp.n_pr = ctx.integer(value);
            else if (key == "birth_rate") spec.bp.birth_rate = ctx.number(value);
            else if (key == "survival_prob") spec.bp.survival_prob = ctx.number(value);
            else if (key == "birth_velocity_std") spec.bp.birth_velocity_std = ctx.number(value);
            else if (key == "q") spec.bp.motion = MotionModel::constant_velocity(sc.dt, ctx.number(value));
            else ctx.fail("unknown key");
        } else if (section == "ospa") {
            if (key == "c") spec.ospa.c = ctx.number(value);
            else if (key == "p") spec.ospa.p = ctx.number(value);
            else if (key == "w") spec.ospa.w = ctx.integer(value);
            else ctx.fail("unknown key");
        }
    }
    // Sensors without an explicit boresight look at the region centre.
    ScenarioConfig& sc = spec.scenario_config;
    const double cx = 0.5 * (sc.region_xmin + sc.region_xmax);
    const double cy = 0.5 * (sc.region_ymin + sc.region_ymax);
    for (std::size_t i = 0; i < boresight_given.size(); ++i) {
        if (!boresight_given[i]) {
            auto& s = sc.sensors[sc.sensors.size() - boresight_given.size() + i];
            s.boresight = std::atan2(cy - s.y, cx - s.x);
        }
    }
    try {
        spec.validate();
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(source + ": " + e.what());
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

namespace {

std::vector<Vector> positions(const std::vector<std::pair<int, Vector>>& states) {
    std::vector<Vector> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.second.head(2));
    return out;
}

void record(std::map<int, Trajectory>& trajectories, int label, int scan, const Vector& state) {
    Trajectory& t = trajectories[label];
    t.label = label;
    t.states[scan] = state.head(2);
}

std::vector<Trajectory> as_vector(const std::map<int, Trajectory>& m) {
    std::vector<Trajectory> out;
    out.reserve(m.size());
    for (const auto& [label, t] : m) out.push_back(t);
    return out;
}

struct Arm {
    PayloadKind payload;
    MdaState mda;
    BpState bp;
    std::map<int, Trajectory> tracks;
    ArmResult result;
};

}  // namespace

RunResult run_single(const ExperimentSpec& spec, double sweep_value, int run, bool compare_traces) {
    ScenarioConfig cfg = spec.scenario_for(sweep_value);
    const std::uint64_t run_seed = spec.seed + static_cast<std::uint64_t>(run);
    cfg.seed = run_seed;
    const std::uint64_t run_key = static_cast<std::uint64_t>(run);
    const std::vector<TruthTrack> truth = generate_truth(cfg, run_key);

    BpConfig bp = spec.bp;
    bp.region_xmin = cfg.region_xmin;
    bp.region_xmax = cfg.region_xmax;
    bp.region_ymin = cfg.region_ymin;
    bp.region_ymax = cfg.region_ymax;

    std::vector<LocalGnnTracker> locals(cfg.sensors.size(), LocalGnnTracker(spec.local));
    std::vector<Arm> arms;
    for (PayloadKind p : spec.payloads) {
        Arm a;
        a.payload = p;
        a.result.payload = p;
        arms.push_back(std::move(a));
    }

    RunResult out;
    out.sweep_value = sweep_value;
    out.run = run;
    for (PayloadKind k : {PayloadKind::Raw, PayloadKind::InfoFilter, PayloadKind::Type1, PayloadKind::Type2}) {
        out.bytes[k] = 0;
    }
    std::map<int, Trajectory> truth_tracks;
    std::vector<BpStepTrace> traces(arms.size());

    for (int scan = 1; scan <= cfg.duration; ++scan) {
        const std::vector<SensorScan> scans = generate_measurements(truth, cfg, run_key, scan);
        std::vector<std::vector<int>> reports(scans.size());
        for (std::size_t l = 0; l < scans.size(); ++l) {
            reports[l] = locals[l].step(scans[l]);
            const int m = static_cast<int>(scans[l].H.rows());
            const int n = static_cast<int>(scans[l].H.cols());
            for (auto& [kind, bytes] : out.bytes) bytes += comm_bytes(kind, m, n, reports[l].size());
        }

        std::vector<std::pair<int, Vector>> truth_now;
        for (const auto& t : truth) {
            if (!t.alive(scan)) continue;
            truth_now.emplace_back(t.id, t.at(scan));
            record(truth_tracks, t.id, scan, t.at(scan));
        }
        out.card_true.push_back(static_cast<int>(truth_now.size()));
        const std::vector<Trajectory> truth_vec = as_vector(truth_tracks);

        for (std::size_t a = 0; a < arms.size(); ++a) {
            Arm& arm = arms[a];
            std::vector<MeasurementBatch> batches;
            batches.reserve(scans.size());
            for (std::size_t l = 0; l < scans.size(); ++l) {
                batches.push_back(make_batch(scans[l], cfg.sensors[l], reports[l], arm.payload));
            }
            std::vector<std::pair<int, Vector>> est;
            if (spec.fusion == FusionKind::Mda) {
                arm.mda = mda_pipeline_step(arm.mda, batches, spec.mda);
                for (const auto& t : arm.mda.tracks) {
                    if (t.confirmed) est.emplace_back(t.label, t.est.mean);
                }
            } else {
                Rng rng = make_rng(run_seed, run_key, 0, static_cast<std::uint64_t>(scan), RngPurpose::Fusion);
                bp_pipeline_step(arm.bp, batches, bp, rng, compare_traces ? &traces[a] : nullptr);
                for (const auto& e : declare_estimates(arm.bp.beliefs, bp)) est.emplace_back(e.label, e.state);
            }
            for (const auto& [label, x] : est) record(arm.tracks, label, scan, x);
            arm.result.ospa.push_back(ospa(positions(truth_now), positions(est), spec.ospa));
            arm.result.ospa2.push_back(ospa2(truth_vec, as_vector(arm.tracks), scan, spec.ospa));
            arm.result.card_est.push_back(static_cast<int>(est.size()));
        }
        for (std::size_t a = 1; a < arms.size(); ++a) {
            out.max_ospa_diff =
                std::max(out.max_ospa_diff, std::abs(arms[a].result.ospa.back() - arms[0].result.ospa.back()));
            if (compare_traces && spec.fusion == FusionKind::Bp) {
                out.max_trace_diff = std::max(out.max_trace_diff, trace_difference(traces[0], traces[a]));
            }
        }
    }
    for (auto& arm : arms) out.arms.push_back(std::move(arm.result));
    return out;
}

ExperimentResult run_monte_carlo(const ExperimentSpec& spec, bool compare_traces) {
    spec.validate();
    const std::vector<double> sweep = spec.effective_sweep();
    const std::size_t jobs = sweep.size() * static_cast<std::size_t>(spec.runs);
    ExperimentResult result;
    result.runs.resize(jobs);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    auto worker = [&]() {
        for (std::size_t j = next++; j < jobs; j = next++) {
            try {
                const std::size_t s = j / static_cast<std::size_t>(spec.runs);
                const int r = static_cast<int>(j % static_cast<std::size_t>(spec.runs));
                result.runs[j] = run_single(spec, sweep[s], r, compare_traces);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(spec.workers, static_cast<int>(jobs));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return result;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string sweep_label(const ExperimentSpec& spec, double v) {
    return spec.sweep_key.empty() ? "none" : fmt(v);
}

}  // namespace

std::string format_curves_csv(const ExperimentSpec& spec, const ExperimentResult& result) {
    const std::vector<double> sweep = spec.effective_sweep();
    const int duration = spec.scenario_config.duration;
    const std::size_t runs = static_cast<std::size_t>(spec.runs);
    std::ostringstream out;
    out << "scan,metric,sweep_value,payload,fusion,value\n";
    for (int k = 0; k < duration; ++k) {
        for (std::size_t s = 0; s < sweep.size(); ++s) {
            for (std::size_t a = 0; a < spec.payloads.size(); ++a) {
                double ospa_sum = 0.0, ospa2_sum = 0.0, est_sum = 0.0, true_sum = 0.0;
                for (std::size_t r = 0; r < runs; ++r) {
                    const RunResult& rr = result.runs[s * runs + r];
                    const ArmResult& arm = rr.arms[a];
                    ospa_sum += arm.ospa[static_cast<std::size_t>(k)];
                    ospa2_sum += arm.ospa2[static_cast<std::size_t>(k)];
                    est_sum += arm.card_est[static_cast<std::size_t>(k)];
                    true_sum += rr.card_true[static_cast<std::size_t>(k)];
                }
                const double n = static_cast<double>(runs);
                const std::string tail = "," + sweep_label(spec, sweep[s]) + "," + to_string(spec.payloads[a]) + "," +
                                         to_string(spec.fusion) + ",";
                out << k + 1 << ",ospa" << tail << fmt(ospa_sum / n) << "\n";
                out << k + 1 << ",ospa2" << tail << fmt(ospa2_sum / n) << "\n";
                out << k + 1 << ",card_est" << tail << fmt(est_sum / n) << "\n";
                out << k + 1 << ",card_true" << tail << fmt(true_sum / n) << "\n";
            }
        }
    }
    return out.str();
}

namespace {

double mean_bytes_per_scan(const ExperimentSpec& spec, const ExperimentResult& result, std::size_t s,
                           PayloadKind kind) {
    const std::size_t runs = static_cast<std::size_t>(spec.runs);
    double total = 0.0;
    for (std::size_t r = 0; r < runs; ++r) total += static_cast<double>(result.runs[s * runs + r].bytes.at(kind));
    return total / (static_cast<double>(runs) * spec.scenario_config.duration);
}

constexpr PayloadKind kAllKinds[] = {PayloadKind::Raw, PayloadKind::InfoFilter, PayloadKind::Type1,
                                     PayloadKind::Type2};

}  // namespace

std::string format_comm_csv(const ExperimentSpec& spec, const ExperimentResult& result) {
    const std::vector<double> sweep = spec.effective_sweep();
    std::ostringstream out;
    out << "sweep_value,payload,bytes_per_scan\n";
    for (std::size_t s = 0; s < sweep.size(); ++s) {
        for (PayloadKind kind : kAllKinds) {
            out << sweep_label(spec, sweep[s]) << "," << to_string(kind) << ","
                << fmt(mean_bytes_per_scan(spec, result, s, kind)) << "\n";
        }
    }
    return out.str();
}

std::string format_summary(const ExperimentSpec& spec, const ExperimentResult& result) {
    const std::vector<double> sweep = spec.effective_sweep();
    const std::size_t runs = static_cast<std::size_t>(spec.runs);
    std::ostringstream out;
    char line[256];
    out << "scenario: " << spec.scenario << "  fusion: " << to_string(spec.fusion) << "  runs: " << spec.runs
        << "  seed: " << spec.seed << "\n\n";
    out << "Communication requirement (bytes per scan, summed over sensors)\n";
    std::snprintf(line, sizeof line, "%-14s", spec.sweep_key.empty() ? "payload" : spec.sweep_key.c_str());
    out << line;
    for (double v : sweep) {
        std::snprintf(line, sizeof line, " %12s", sweep_label(spec, v).c_str());
        out << line;
    }
    out << "\n";
    for (PayloadKind kind : kAllKinds) {
        std::snprintf(line, sizeof line, "%-14s", to_string(kind).c_str());
        out << line;
        for (std::size_t s = 0; s < sweep.size(); ++s) {
            std::snprintf(line, sizeof line, " %12.1f", mean_bytes_per_scan(spec, result, s, kind));
            out << line;
        }
        out << "\n";
    }
    out << "\nMean over scans and runs\n";
    std::snprintf(line, sizeof line, "%-12s %-8s %10s %10s %10s %10s\n", "sweep", "payload", "ospa", "ospa2",
                  "card_est", "card_true");
    out << line;
    double worst_diff = 0.0;
    for (std::size_t s = 0; s < sweep.size(); ++s) {
        for (std::size_t a = 0; a < spec.payloads.size(); ++a) {
            double o = 0.0, o2 = 0.0, ce = 0.0, ct = 0.0;
            std::size_t count = 0;
            for (std::size_t r = 0; r < runs; ++r) {
                const RunResult& rr = result.runs[s * runs + r];
                worst_diff = std::max(worst_diff, rr.max_ospa_diff);
                const ArmResult& arm = rr.arms[a];
                for (std::size_t k = 0; k < arm.ospa.size(); ++k) {
                    o += arm.ospa[k];
                    o2 += arm.ospa2[k];
                    ce += arm.card_est[k];
                    ct += rr.card_true[k];
                    ++count;
                }
            }
            const double n = static_cast<double>(std::max<std::size_t>(count, 1));
            std::snprintf(line, sizeof line, "%-12s %-8s %10.3f %10.3f %10.3f %10.3f\n",
                          sweep_label(spec, sweep[s]).c_str(), to_string(spec.payloads[a]).c_str(), o / n, o2 / n,
                          ce / n, ct / n);
            out << line;
        }
    }
    if (spec.payloads.size() > 1) {
        std::snprintf(line, sizeof line, "\nlargest per-scan OSPA difference between payload arms: %.3e\n", worst_diff);
        out << line;
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result = run_monte_carlo(spec);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(spec.output_dir, ec);
    if (ec) throw Error("cannot create output directory '" + spec.output_dir + "': " + ec.message());
    auto write = [&](const std::string& name, const std::string& body) {
        const fs::path path = fs::path(spec.output_dir) / name;
        std::ofstream f(path, std::ios::binary);
        f << body;
        if (!f) throw Error("cannot write '" + path.string() + "'");
    };
    write("curves.csv", format_curves_csv(spec, result));
    write("comm.csv", format_comm_csv(spec, result));
    write("summary.txt", format_summary(spec, result));
    return result;
}

}  // namespace trackfuse
