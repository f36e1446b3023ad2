#pragma once

#include <vector>

#include "trackfuse/linalg.hpp"
#include "trackfuse/transform.hpp"

namespace trackfuse {

// Angular wedge with a range limit, centred on the sensor position.
struct FieldOfView {
    double x = 0.0;
    double y = 0.0;
    double boresight = 0.0;   // rad
    double half_angle = 0.0;  // rad
    double range = 0.0;       // m

    bool contains(double px, double py) const;
    double area() const { return half_angle * range * range; }
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// One sensor's data for one scan as seen by the fusion center. z, H and R are
/// expressed in the coordinates the sensor transmitted (raw or transformed).
struct MeasurementBatch {
    int sensor_id = 0;
    TransformKind encoding = TransformKind::Identity;
    std::vector<Vector> z;
    Matrix H;
    Matrix R;
    double detection_prob = 0.9;
    double clutter_rate = 10.0;
    double log_clutter_density = 0.0;  // in batch coordinates
    FieldOfView fov;

    std::size_t size() const { return z.size(); }
    ClutterModel clutter() const;
};

/// Re-expresses a raw batch in transformed coordinates. The clutter density is
/// rescaled by the volume factor of A. `generic_A` is required for the generic kind.
MeasurementBatch encode_batch(const MeasurementBatch& raw, TransformKind kind, const Matrix* generic_A = nullptr);

/// The transformation encode_batch would apply to this raw batch.
Transformation batch_transformation(const MeasurementBatch& raw, TransformKind kind, const Matrix* generic_A = nullptr);

/// log p(z | prediction) in batch coordinates: Gaussian for raw batches, the
/// generalized (pseudo-determinant) likelihood for transformed ones.
double batch_log_likelihood(const MeasurementBatch& batch, const Vector& z, const Vector& z_hat, const Matrix& S);

/// Precomputed per-batch evaluator of log p(z_i | x) for point states x, used by
/// the particle tracker where the likelihood is evaluated millions of times.
class BatchLikelihood {
public:
    explicit BatchLikelihood(const MeasurementBatch& batch);

    /// log N(z_i; H x, R) (generalized for singular R).
    double log_likelihood(std::size_t i, const Eigen::Ref<const Vector>& x) const;
    /// Same quantity for a batch of states (columns), written into out.
    void log_likelihood_all(std::size_t i, const Matrix& states, Eigen::Ref<Vector> out) const;

    const MeasurementBatch& batch() const { return *batch_; }

private:
    const MeasurementBatch* batch_;
    Matrix W_;        // rank x m whitening map: W^T W = R^+
    Matrix WH_;       // W H
    std::vector<Vector> Wz_;
    double log_norm_ = 0.0;
};

}  // namespace trackfuse
