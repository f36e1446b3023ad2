#pragma once

#include <vector>

#include "trackfuse/batch.hpp"
#include "trackfuse/models.hpp"
#include "trackfuse/rng.hpp"

namespace trackfuse {

struct BpConfig {
    int iterations = 10;          // P
    int num_particles = 1000;     // N_p
    double p_th = 0.7;            // declaration threshold
    double p_pr = 1e-6;           // pruning threshold
    int n_pr = 3;                 // missed scans tolerated
    double birth_rate = 0.05;     // lambda_n, mean new targets per sensor and scan
    double survival_prob = 0.999;
    double birth_velocity_std = 10.0;   // m/s
    double birth_inflation = 4.0;       // proposal covariance factor on the back-projected position
    double region_xmin = -1000.0, region_xmax = 1000.0;
    double region_ymin = -1000.0, region_ymax = 1000.0;
    MotionModel motion = MotionModel::constant_velocity(1.0, 0.5);

    double region_area() const { return (region_xmax - region_xmin) * (region_ymax - region_ymin); }
    void validate() const;
};

/// Particle representation of f(x, r): the r = 1 part carries the particles,
/// the r = 0 part is the scalar 1 - r_prob.
struct ParticleBelief {
    int label = 0;
    Matrix particles;  // n x N_p, one state per column
    Vector weights;    // sums to r_prob
    double r_prob = 0.0;
    int missed_scans = 0;
    bool detected = false;  // set during the current scan

    Vector estimate() const;  // weighted mean of the r = 1 part
};

/// Particles drawn for the potential new target of one measurement.
struct BirthSample {
    Matrix particles;
    Vector log_weights;  // log of lambda_n f_n p(z|x) / (lambda_f p_f(z) g(x))
    Vector weights;      // exp(log_weights)
    double integral = 0.0;  // Monte Carlo estimate of the integral of v(x, 1, 0)
};

struct AssociationMessages {
    std::vector<Vector> beta;   // per track, over a = 0..M
    std::vector<Vector> xi;     // per measurement, over b = 0..N
    std::vector<Vector> kappa;  // per track, over a = 0..M
    std::vector<Vector> iota;   // per measurement, over b = 0..N
};

/// Per-particle values of q(x, 1, a) for one track: column 0 is 1 - P_d(x), column
/// j is P_d(x) p(z_j|x) / (lambda_f p_f(z_j)).
struct TrackEvaluation {
    Matrix q;
};

struct SensorEvaluation {
    AssociationMessages msgs;
    std::vector<TrackEvaluation> tracks;
    std::vector<BirthSample> births;
};

/// Prediction with survival: particles move through F plus process noise and r_prob
/// is multiplied by the survival probability.
void bp_predict(std::vector<ParticleBelief>& beliefs, const MotionModel& motion, double survival_prob, Rng& rng);

/// Probability of detection at a state: P_d inside the field of view, 0 outside.
double detection_probability(const MeasurementBatch& batch, const Eigen::Ref<const Vector>& x);

/// Draws the birth particles of measurement i from the proposal around its
/// back-projected position.
BirthSample sample_birth(const MeasurementBatch& batch, const BatchLikelihood& lik, std::size_t i,
                         const BpConfig& config, Rng& rng);

/// beta for every track and xi for every measurement of one sensor.
SensorEvaluation measurement_evaluation(const std::vector<ParticleBelief>& beliefs, const MeasurementBatch& batch,
                                        const BpConfig& config, Rng& rng);

/// P rounds of message passing; fills kappa and iota, each scaled to a unit maximum.
/// Throws DegenerateError when a message loses all its mass.
void iterative_association(AssociationMessages& msgs, int iterations);

struct UpdateTerms {
    std::vector<Vector> gamma1;   // per track, per particle
    std::vector<double> gamma0;
    std::vector<Vector> sigma1;   // per new target, per birth particle
    std::vector<double> sigma0;
};

UpdateTerms measurement_update(const SensorEvaluation& eval);

/// Normalized beliefs: the survived tracks followed by one new belief per
/// measurement. Resamples a belief when its effective sample size drops below
/// N_p / 2 (one uniform is drawn per belief either way).
std::vector<ParticleBelief> belief_calculation(const std::vector<ParticleBelief>& priors, const SensorEvaluation& eval,
                                               const UpdateTerms& terms, int& next_label, const BpConfig& config,
                                               Rng& rng, std::vector<Vector>* pre_resample_weights = nullptr);

/// Systematic resampling of a belief to N_p equally weighted particles.
void systematic_resample(ParticleBelief& belief, double u);

struct BpEstimate {
    int label = 0;
    Vector state;
    double r_prob = 0.0;
};

std::vector<BpEstimate> declare_estimates(const std::vector<ParticleBelief>& beliefs, const BpConfig& config);

/// Drops beliefs with r_prob < P_pr or more than N_pr consecutive missed scans.
void prune_beliefs(std::vector<ParticleBelief>& beliefs, const BpConfig& config);

struct BpSensorTrace {
    int sensor_id = 0;
    std::size_t n_before = 0;  // N_{k,l}
    std::size_t n_measurements = 0;
    AssociationMessages msgs;
    std::vector<Vector> weights;  // per belief, after the update and before resampling
    std::vector<double> r_prob;
    std::vector<int> labels;
};

struct BpStepTrace {
    std::vector<BpSensorTrace> sensors;
};

struct BpState {
    std::vector<ParticleBelief> beliefs;
    int next_label = 1;
    int scan = 0;
};

/// One scan: prediction, then every sensor in ascending id order, then pruning.
void bp_pipeline_step(BpState& state, const std::vector<MeasurementBatch>& batches, const BpConfig& config, Rng& rng,
                      BpStepTrace* trace = nullptr);

/// Largest per-entry relative difference between two traces; +inf when the shapes
/// or labels differ.
double trace_difference(const BpStepTrace& a, const BpStepTrace& b);

}  // namespace trackfuse
