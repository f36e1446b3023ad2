#pragma once

#include <vector>

#include "trackfuse/assignment.hpp"
#include "trackfuse/batch.hpp"
#include "trackfuse/models.hpp"

namespace trackfuse {

struct HypothesisCost {
    std::vector<int> indices;  // (tau, i_1..i_L) with a prior, (i_1..i_L) without
    std::vector<int> u;        // detection indicator per sensor
    double log_score = 0.0;
    double cost = 0.0;         // -log_score
};

/// Score of the hypothesis that track `pred` produced measurement idx[l] (0 = none)
/// at every sensor l. batches[l] supplies the measurement, model and clutter.
HypothesisCost score_with_prior(const GaussianEstimate& pred, const std::vector<const MeasurementBatch*>& batches,
                                const std::vector<int>& idx);

/// The clutter hypothesis (tau = 0): log score 0.
HypothesisCost score_clutter(const std::vector<int>& idx);

/// Weighted least-squares fit of the selected measurements.
struct MleResult {
    Vector x;          // minimum-norm solution on the observable subspace
    Matrix info;       // sum H^T R^+ H
    Vector info_vec;   // sum H^T R^+ z
    int info_rank = 0;
    int meas_rank = 0; // sum of rank(R_l) over the selected measurements
    double residual = 0.0;  // sum (z - H x)^T R^+ (z - H x)

    int residual_dof() const { return meas_rank - info_rank; }
};
MleResult mle_fit(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx);

/// Strict maximum-likelihood state: throws UnobservableError when the stacked
/// information matrix is singular.
Vector mle_state(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx);

/// Generalized likelihood ratio of a track-initialization hypothesis. The cost is
/// +inf when the tuple leaves no residual degrees of freedom (empty tuples,
/// single measurements of a partially observed state).
HypothesisCost score_without_prior(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx);

enum class SolverKind { Exact, Relaxed };

struct MdaConfig {
    MotionModel motion = MotionModel::constant_velocity(1.0, 0.1);
    double gate_prob = 0.99;
    int confirm_hits = 2;
    int delete_misses = 3;
    std::size_t max_tuples = 200000;
    SolverKind solver = SolverKind::Relaxed;
    double unobserved_prior_var = 1e4;  // variance given to unobservable state directions of new tracks
};

struct MdaProblem {
    AssignmentTable table;                    // solver input
    std::vector<HypothesisCost> hypotheses;   // solver tuples followed by the clutter singletons
    std::size_t solver_tuples = 0;            // hypotheses[0..solver_tuples) map to table rows
};

/// Track-maintenance problem over predicted tracks. Gated tuples per track (the
/// product of each sensor's gated set plus "none"), and one clutter tuple per
/// measurement. Throws ResourceError above config.max_tuples.
MdaProblem build_mda_problem(const std::vector<GaussianEstimate>& tracks,
                             const std::vector<const MeasurementBatch*>& batches, const MdaConfig& config);

/// Initialization problem over the measurements not flagged in `used`
/// (used[l][i-1] true means taken).
MdaProblem build_init_problem(const std::vector<const MeasurementBatch*>& batches,
                              const std::vector<std::vector<char>>& used, const MdaConfig& config);

AssociationSolution solve_mda(const MdaProblem& problem, const MdaConfig& config);

struct FusedTrack {
    int label = 0;
    GaussianEstimate est;
    int hits = 0;
    int misses = 0;
    bool confirmed = false;
};

struct MdaState {
    std::vector<FusedTrack> tracks;
    int next_label = 1;
};

struct MdaStepTrace {
    AssociationSolution maintenance;
    AssociationSolution initialization;
    std::size_t maintenance_tuples = 0;
    std::size_t init_tuples = 0;
    int born = 0;
    int deleted = 0;
};

/// One scan of the association-and-fusion algorithm: predict, maintain, update,
/// initialize new tracks, then confirm and delete.
MdaState mda_pipeline_step(const MdaState& state, const std::vector<MeasurementBatch>& batches,
                           const MdaConfig& config, MdaStepTrace* trace = nullptr);

/// Fuses one measurement from each selected batch into a new track.
GaussianEstimate initialize_track(const std::vector<const MeasurementBatch*>& batches, const std::vector<int>& idx,
                                  double unobserved_prior_var);

}  // namespace trackfuse
