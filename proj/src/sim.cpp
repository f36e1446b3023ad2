#include "trackfuse/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "trackfuse/assignment.hpp"
#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {

constexpr double kPi = std::numbers::pi;

Vector state4(double px, double py, double vx, double vy) {
    Vector x(4);
    x << px, py, vx, vy;
    return x;
}

SensorSpec aimed_sensor(double x, double y, double cx, double cy) {
    SensorSpec s;
    s.x = x;
    s.y = y;
    s.boresight = std::atan2(cy - y, cx - x);
    s.half_angle = kPi / 4.0;
    s.range = 1200.0;
    return s;
}

void field_error(const std::string& field, const std::string& what) {
    throw ConfigurationError("scenario field '" + field + "': " + what);
}

}  // namespace

ScenarioConfig ScenarioConfig::scenario1() {
    ScenarioConfig c;
    c.name = "scenario1";
    c.region_xmin = -800.0;
    c.region_xmax = 800.0;
    c.region_ymin = -800.0;
    c.region_ymax = 400.0;
    const double cx = 0.5 * (c.region_xmin + c.region_xmax);
    const double cy = 0.5 * (c.region_ymin + c.region_ymax);
    c.sensors.push_back(aimed_sensor(-600.0, -800.0, cx, cy));
    c.sensors.push_back(aimed_sensor(600.0, -800.0, cx, cy));
    c.targets.push_back({1, 100, state4(-300.0, -500.0, 4.0, 2.0)});
    c.targets.push_back({1, 100, state4(300.0, -600.0, -3.0, 3.0)});
    c.targets.push_back({10, 80, state4(-200.0, 0.0, 4.0, -3.0)});
    return c;
}

ScenarioConfig ScenarioConfig::scenario2(std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "scenario2";
    c.seed = seed;
    for (int j = 0; j < 10; ++j) {
        const double a = 2.0 * kPi * j / 10.0;
        c.sensors.push_back(aimed_sensor(1000.0 * std::cos(a), 1000.0 * std::sin(a), 0.0, 0.0));
    }
    const int births[10] = {1, 1, 1, 20, 20, 20, 40, 40, 40, 40};
    const int deaths[10] = {100, 100, 100, 60, 60, 60, 80, 80, 80, 80};
    Rng rng = make_rng(seed, 0, 0, 0, RngPurpose::TargetInit);
    const double span = 0.6 * 1000.0;
    const double keep = 0.8 * 1000.0;
    for (int t = 0; t < 10; ++t) {
        const int life = deaths[t] - births[t];
        Vector x;
        while (true) {
            const double px = -span + 2.0 * span * uniform01(rng);
            const double py = -span + 2.0 * span * uniform01(rng);
            const double speed = 5.0 + 10.0 * uniform01(rng);
            const double heading = 2.0 * kPi * uniform01(rng);
            const double ex = px + life * speed * std::cos(heading);
            const double ey = py + life * speed * std::sin(heading);
            if (std::abs(ex) <= keep && std::abs(ey) <= keep) {
                x = state4(px, py, speed * std::cos(heading), speed * std::sin(heading));
                break;
            }
        }
        c.targets.push_back({births[t], deaths[t], x});
    }
    return c;
}

void ScenarioConfig::set_detection_prob(double pd) {
    for (auto& s : sensors) s.detection_prob = pd;
}

void ScenarioConfig::set_clutter_rate(double rate) {
    for (auto& s : sensors) s.clutter_rate = rate;
}

void ScenarioConfig::validate() const {
    if (duration < 1) field_error("duration", "must be at least 1");
    if (!(dt > 0.0)) field_error("dt", "must be positive");
    if (!(q >= 0.0)) field_error("q", "must be nonnegative");
    if (!(sigma > 0.0)) field_error("sigma", "must be positive");
    if (theta_lo > theta_hi) field_error("theta_range", "lower bound above upper bound");
    if (vartheta_lo > vartheta_hi || vartheta_lo < 0.0) field_error("vartheta_range", "invalid bounds");
    if (!(region_xmin < region_xmax) || !(region_ymin < region_ymax)) field_error("region", "empty region");
    if (sensors.empty()) field_error("sensor", "at least one sensor is required");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto& s = sensors[i];
        const std::string f = "sensor[" + std::to_string(i + 1) + "].";
        if (!(s.range > 0.0)) field_error(f + "range", "must be positive");
        if (!(s.half_angle > 0.0) || s.half_angle > kPi) field_error(f + "half_angle", "must lie in (0, pi]");
        if (!(s.detection_prob > 0.0) || s.detection_prob > 1.0) field_error(f + "pd", "must lie in (0, 1]");
        if (!(s.clutter_rate > 0.0)) field_error(f + "clutter_rate", "must be positive");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        const std::string f = "target[" + std::to_string(i + 1) + "].";
        if (t.birth < 1 || t.birth >= t.death || t.death > duration) {
            field_error(f + "birth/death", "need 1 <= birth < death <= duration");
        }
        if (t.initial.size() != 4) field_error(f + "state", "needs four components");
    }
}

std::vector<TruthTrack> generate_truth(const ScenarioConfig& config, std::uint64_t run) {
    const MotionModel motion = MotionModel::constant_velocity(config.dt, 1.0);
    Matrix G(4, 2);
    G << 0.5 * config.dt * config.dt, 0.0, 0.0, 0.5 * config.dt * config.dt, config.dt, 0.0, 0.0, config.dt;
    std::vector<TruthTrack> out;
    for (std::size_t t = 0; t < config.targets.size(); ++t) {
        const TargetSpec& spec = config.targets[t];
        Rng rng = make_rng(config.seed, run, t + 1, 0, RngPurpose::Truth);
        TruthTrack track;
        track.id = static_cast<int>(t) + 1;
        track.birth = spec.birth;
        Vector x = spec.initial;
        track.states.push_back(x);
        for (int k = spec.birth + 1; k <= spec.death; ++k) {
            Vector v(2);
            v << config.q * standard_normal(rng), config.q * standard_normal(rng);
            x = motion.F * x + G * v;
            track.states.push_back(x);
        }
        out.push_back(std::move(track));
    }
    return out;
}

Vector sample_in_fov(const FieldOfView& fov, Rng& rng) {
    const double r = fov.range * std::sqrt(uniform01(rng));
    const double a = fov.boresight + fov.half_angle * (2.0 * uniform01(rng) - 1.0);
    Vector p(2);
    p << fov.x + r * std::cos(a), fov.y + r * std::sin(a);
    return p;
}

std::vector<SensorScan> generate_measurements(const std::vector<TruthTrack>& truth, const ScenarioConfig& config,
                                              std::uint64_t run, int scan) {
    std::vector<SensorScan> out;
    for (std::size_t l = 0; l < config.sensors.size(); ++l) {
        const SensorSpec& sensor = config.sensors[l];
        const FieldOfView fov = sensor.fov();
        SensorScan s;
        s.sensor_id = static_cast<int>(l) + 1;
        s.scan = scan;

        Rng prng = make_rng(config.seed, run, l + 1, static_cast<std::uint64_t>(scan), RngPurpose::SensorParams);
        s.theta.resize(2);
        s.vartheta.resize(2);
        for (int i = 0; i < 2; ++i) {
            s.theta(i) = config.theta_lo + (config.theta_hi - config.theta_lo) * uniform01(prng);
        }
        for (int i = 0; i < 2; ++i) {
            s.vartheta(i) = config.vartheta_lo + (config.vartheta_hi - config.vartheta_lo) * uniform01(prng);
        }
        s.H = Matrix::Zero(2, 4);
        s.H(0, 0) = 1.0 + s.theta(0);
        s.H(1, 1) = 1.0 + s.theta(1);
        s.R = Matrix::Zero(2, 2);
        s.R(0, 0) = config.sigma * config.sigma + s.vartheta(0);
        s.R(1, 1) = config.sigma * config.sigma + s.vartheta(1);

        Rng drng = make_rng(config.seed, run, l + 1, static_cast<std::uint64_t>(scan), RngPurpose::Detection);
        Rng nrng = make_rng(config.seed, run, l + 1, static_cast<std::uint64_t>(scan), RngPurpose::MeasurementNoise);
        const Vector rstd = s.R.diagonal().cwiseSqrt();
        for (const auto& track : truth) {
            // One detection draw per target, alive or not, keeps the stream aligned.
            const double u = uniform01(drng);
            if (!track.alive(scan)) continue;
            const Vector& x = track.at(scan);
            if (!fov.contains(x(0), x(1))) continue;
            if (u >= sensor.detection_prob) continue;
            Vector w(2);
            w << rstd(0) * standard_normal(nrng), rstd(1) * standard_normal(nrng);
            s.detections.push_back({s.H * x + w, track.id});
        }
        Rng crng = make_rng(config.seed, run, l + 1, static_cast<std::uint64_t>(scan), RngPurpose::Clutter);
        const std::uint64_t n_clutter = poisson(crng, sensor.clutter_rate);
        for (std::uint64_t c = 0; c < n_clutter; ++c) {
            s.detections.push_back({sample_in_fov(fov, crng), 0});
        }
        out.push_back(std::move(s));
    }
    return out;
}

void LocalTrackerConfig::validate() const {
    if (confirm_hits < 1) throw ConfigurationError("local tracker: confirm_hits must be at least 1");
    if (delete_misses < 1) throw ConfigurationError("local tracker: delete_misses must be at least 1");
    if (!(gate_prob > 0.0 && gate_prob < 1.0)) throw ConfigurationError("local tracker: gate_prob must lie in (0, 1)");
}

namespace {

// Position estimate of a single measurement: weighted least squares on the
// position columns of H.
void position_fit(const Vector& z, const Matrix& H, const Matrix& R, Vector& pos, Matrix& cov) {
    const Matrix Hp = H.leftCols(2);
    const Matrix Rinv = R.inverse();
    const Matrix info = symmetrize(Hp.transpose() * Rinv * Hp);
    cov = symmetrize(info.inverse());
    pos = cov * Hp.transpose() * Rinv * z;
}

}  // namespace

std::vector<int> LocalGnnTracker::step(const SensorScan& scan) {
    const MeasurementModel model{scan.H, scan.R, scan.sensor_id};
    const std::size_t M = scan.detections.size();
    const std::size_t T = tracks_.size();
    const double gate = chi2_quantile(static_cast<int>(scan.H.rows()), config_.gate_prob);

    // Predicted measurement statistics; single-point tracks use a zero-velocity
    // pseudo-state whose velocity spread covers max_speed.
    std::vector<Innovation> inns(T);
    for (std::size_t t = 0; t < T; ++t) {
        LocalTrack& tr = tracks_[t];
        if (tr.single_point) {
            GaussianEstimate pseudo;
            pseudo.mean = Vector::Zero(4);
            pseudo.mean.head(2) = tr.first_position;
            pseudo.cov = Matrix::Zero(4, 4);
            pseudo.cov.topLeftCorner(2, 2) = tr.first_position_cov;
            const double vs = config_.max_speed / 2.0;
            pseudo.cov.bottomRightCorner(2, 2) = vs * vs * Matrix::Identity(2, 2);
            inns[t] = innovation(predict(pseudo, config_.motion), model);
        } else {
            tr.est = predict(tr.est, config_.motion);
            inns[t] = innovation(tr.est, model);
        }
    }

    std::vector<int> assigned(T, -1);
    if (T > 0) {
        Matrix C = Matrix::Constant(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(M + T), kInf);
        for (std::size_t t = 0; t < T; ++t) {
            Eigen::LLT<Matrix> llt(inns[t].S);
            const Matrix L = llt.matrixL();
            const double half_log_det = L.diagonal().array().log().sum();
            for (std::size_t j = 0; j < M; ++j) {
                const Vector w = L.triangularView<Eigen::Lower>().solve(scan.detections[j].z - inns[t].z_hat);
                const double d2 = w.squaredNorm();
                if (d2 <= gate) C(t, j) = 0.5 * d2 + half_log_det;
            }
            C(t, M + t) = 0.5 * gate + half_log_det;
        }
        const std::vector<int> match = solve_linear_assignment(C);
        for (std::size_t t = 0; t < T; ++t) {
            if (match[t] < static_cast<int>(M)) assigned[t] = match[t];
        }
    }

    std::vector<char> used(M, 0);
    std::vector<LocalTrack> next;
    std::vector<std::pair<int, int>> reports;  // (track id, detection index)
    for (std::size_t t = 0; t < T; ++t) {
        LocalTrack tr = tracks_[t];
        const int j = assigned[t];
        if (j < 0) {
            ++tr.misses;
            if (tr.single_point || tr.misses >= config_.delete_misses) continue;
            next.push_back(std::move(tr));
            continue;
        }
        used[static_cast<std::size_t>(j)] = 1;
        const Vector& z = scan.detections[static_cast<std::size_t>(j)].z;
        if (tr.single_point) {
            // Two-point differencing.
            Vector p2;
            Matrix c2;
            position_fit(z, scan.H, scan.R, p2, c2);
            const double dt = config_.motion.F(0, 2);
            tr.est.mean = Vector::Zero(4);
            tr.est.mean.head(2) = p2;
            tr.est.mean.tail(2) = (p2 - tr.first_position) / dt;
            tr.est.cov = Matrix::Zero(4, 4);
            tr.est.cov.topLeftCorner(2, 2) = c2;
            tr.est.cov.topRightCorner(2, 2) = c2 / dt;
            tr.est.cov.bottomLeftCorner(2, 2) = c2 / dt;
            tr.est.cov.bottomRightCorner(2, 2) = (c2 + tr.first_position_cov) / (dt * dt);
            tr.est.cov = symmetrize(tr.est.cov);
            tr.single_point = false;
        } else {
            tr.est = update_raw(tr.est, z, model);
        }
        ++tr.hits;
        tr.misses = 0;
        if (tr.hits >= config_.confirm_hits) tr.confirmed = true;
        if (tr.confirmed) reports.emplace_back(tr.id, j);
        next.push_back(std::move(tr));
    }
    for (std::size_t j = 0; j < M; ++j) {
        if (used[j]) continue;
        LocalTrack tr;
        tr.id = next_id_++;
        position_fit(scan.detections[j].z, scan.H, scan.R, tr.first_position, tr.first_position_cov);
        tr.single_point = true;
        tr.hits = 1;
        tr.confirmed = tr.hits >= config_.confirm_hits;
        if (tr.confirmed) reports.emplace_back(tr.id, static_cast<int>(j));
        next.push_back(std::move(tr));
    }
    tracks_ = std::move(next);
    std::sort(reports.begin(), reports.end());
    std::vector<int> out;
    for (const auto& r : reports) out.push_back(r.second);
    return out;
}

TransformKind transform_for(PayloadKind payload) {
    switch (payload) {
        case PayloadKind::Raw: return TransformKind::Identity;
        case PayloadKind::Type1: return TransformKind::Type1;
        case PayloadKind::Type2: return TransformKind::Type2;
        case PayloadKind::InfoFilter: break;
    }
    throw InvalidInput("payload kind '" + to_string(payload) + "' has no measurement encoding");
}

MeasurementBatch make_batch(const SensorScan& scan, const SensorSpec& sensor, const std::vector<int>& reports,
                            PayloadKind payload) {
    MeasurementBatch raw;
    raw.sensor_id = scan.sensor_id;
    raw.encoding = TransformKind::Identity;
    raw.H = scan.H;
    raw.R = scan.R;
    raw.detection_prob = sensor.detection_prob;
    raw.clutter_rate = sensor.clutter_rate;
    raw.fov = sensor.fov();
    raw.log_clutter_density = -std::log(raw.fov.area());
    for (int j : reports) {
        raw.z.push_back(scan.detections[static_cast<std::size_t>(j)].z);
    }
    return encode_batch(raw, transform_for(payload));
}

}  // namespace trackfuse
