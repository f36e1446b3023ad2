#pragma once

#include <utility>

#include "trackfuse/linalg.hpp"

namespace trackfuse {

struct MotionModel {
    Matrix F;
    Matrix Q;

    int n() const { return static_cast<int>(F.rows()); }

    // Nearly constant velocity in 2-D: F = [1 dt; 0 1] (x) I2, Q = G G^T q^2
    // with G = [dt^2/2; dt] (x) I2. State order is [px, py, vx, vy].
    static MotionModel constant_velocity(double dt, double q);

    // Throws ConfigurationError on shape problems or an asymmetric / indefinite Q.
    void validate() const;
};

struct MeasurementModel {
    Matrix H;
    Matrix R;
    int sensor_id = 0;

    int m() const { return static_cast<int>(H.rows()); }
    int n() const { return static_cast<int>(H.cols()); }

    void validate() const;
};

struct GaussianEstimate {
    Vector mean;
    Matrix cov;
    int timestamp = 0;
};

/// Time update: mean' = F mean, cov' = F cov F^T + Q.
GaussianEstimate predict(const GaussianEstimate& est, const MotionModel& model);

struct Innovation {
    Vector z_hat;
    Matrix S;
};

Innovation innovation(const GaussianEstimate& est_pred, const MeasurementModel& model);

/// Covariance-form Kalman update (Joseph form). Throws NumericalError if S is singular.
GaussianEstimate update_raw(const GaussianEstimate& est_pred, const Vector& z, const MeasurementModel& model);

/// Information-form update with a possibly singular Rt (pseudoinverse).
GaussianEstimate update_transformed(const GaussianEstimate& est_pred, const Vector& zt, const Matrix& Ht,
                                    const Matrix& Rt);

/// Fisher information H^T R^+ H and information vector H^T R^+ z of one measurement.
std::pair<Matrix, Vector> measurement_information(const Vector& z, const Matrix& H, const Matrix& R);

}  // namespace trackfuse
