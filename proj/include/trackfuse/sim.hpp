#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trackfuse/batch.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/models.hpp"
#include "trackfuse/rng.hpp"

namespace trackfuse {

struct SensorSpec {
    double x = 0.0;
    double y = 0.0;
    double boresight = 0.0;   // rad
    double half_angle = 0.0;  // rad
    double range = 1200.0;    // m
    double detection_prob = 0.9;
    double clutter_rate = 10.0;

    FieldOfView fov() const { return {x, y, boresight, half_angle, range}; }
};

struct TargetSpec {
    int birth = 1;   // first scan alive
    int death = 1;   // last scan alive
    Vector initial;  // [px, py, vx, vy] at the birth scan
};

struct ScenarioConfig {
    std::string name = "custom";
    int duration = 100;
    double dt = 1.0;
    double q = 0.1;
    double sigma = 5.0;
    double theta_lo = -0.02, theta_hi = 0.02;
    double vartheta_lo = 0.0, vartheta_hi = 1.0;
    double region_xmin = -1000.0, region_xmax = 1000.0;
    double region_ymin = -1000.0, region_ymax = 1000.0;
    std::vector<SensorSpec> sensors;
    std::vector<TargetSpec> targets;
    std::uint64_t seed = 1;

    /// Two sensors, three targets.
    static ScenarioConfig scenario1();
    /// Ten sensors on a circle, ten targets; initial states drawn from `seed`.
    static ScenarioConfig scenario2(std::uint64_t seed = 1);

    void set_detection_prob(double pd);
    void set_clutter_rate(double rate);
    double region_area() const { return (region_xmax - region_xmin) * (region_ymax - region_ymin); }
    /// Throws ConfigurationError naming the offending field.
    void validate() const;
};

struct TruthTrack {
    int id = 0;  // 1-based target index
    int birth = 1;
    std::vector<Vector> states;  // states[k - birth]

    bool alive(int scan) const { return scan >= birth && scan < birth + static_cast<int>(states.size()); }
    const Vector& at(int scan) const { return states[static_cast<std::size_t>(scan - birth)]; }
};

std::vector<TruthTrack> generate_truth(const ScenarioConfig& config, std::uint64_t run);

struct Detection {
    Vector z;
    int origin = 0;  // target id, 0 for clutter
};

struct SensorScan {
    int sensor_id = 0;
    int scan = 0;
    Matrix H;
    Matrix R;
    Vector theta;
    Vector vartheta;
    std::vector<Detection> detections;
};

/// Per-sensor detections for one scan. Every random draw comes from a stream keyed
/// by (seed, run, sensor, scan, purpose).
std::vector<SensorScan> generate_measurements(const std::vector<TruthTrack>& truth, const ScenarioConfig& config,
                                              std::uint64_t run, int scan);

/// Uniform point in a field-of-view wedge (radius ~ sqrt(u)).
Vector sample_in_fov(const FieldOfView& fov, Rng& rng);

struct LocalTrackerConfig {
    int confirm_hits = 4;
    int delete_misses = 3;
    double gate_prob = 0.99;
    double max_speed = 30.0;  // m/s, bounds the second point of a two-point initialization
    MotionModel motion = MotionModel::constant_velocity(1.0, 0.1);

    void validate() const;
};

struct LocalTrack {
    int id = 0;
    GaussianEstimate est;
    Vector first_position;     // single-point tentative tracks only
    Matrix first_position_cov;
    bool single_point = true;
    int hits = 0;
    int misses = 0;
    bool confirmed = false;
};

/// Global-nearest-neighbour tracker run at each sensor.
class LocalGnnTracker {
public:
    explicit LocalGnnTracker(LocalTrackerConfig config = {}) : config_(std::move(config)) {}

    /// Processes one scan and returns the detection indices (0-based) of the
    /// confirmed tracks updated this scan, in track-id order.
    std::vector<int> step(const SensorScan& scan);

    const std::vector<LocalTrack>& tracks() const { return tracks_; }

private:
    LocalTrackerConfig config_;
    std::vector<LocalTrack> tracks_;
    int next_id_ = 1;
};

/// Assembles the fusion-center batch from the reports of one sensor and encodes it.
MeasurementBatch make_batch(const SensorScan& scan, const SensorSpec& sensor, const std::vector<int>& reports,
                            PayloadKind payload);

TransformKind transform_for(PayloadKind payload);

}  // namespace trackfuse
