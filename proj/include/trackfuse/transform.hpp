#pragma once

#include <string>

#include "trackfuse/linalg.hpp"
#include "trackfuse/models.hpp"

namespace trackfuse {

enum class TransformKind { Identity, Type1, Type2, GenericFullColumnRank };

std::string to_string(TransformKind kind);

// z_t = A z, H_t = A H (or its Type 1 equivalent), R_t = A R A^T.
struct Transformation {
    Matrix A;
    TransformKind kind = TransformKind::Identity;
    Matrix Ht;
    Matrix Rt;

    Vector apply(const Vector& z) const { return A * z; }
};

Transformation make_identity(const MeasurementModel& model);

/// Whitening transform built from a full-rank decomposition H = B D.
Transformation make_type1(const MeasurementModel& model);

/// H = [E, 0]: A = E^-1, Ht = [I, 0], Rt = E^-1 R E^-T.
Transformation make_type2(const MeasurementModel& model);

/// Arbitrary A; throws InvalidInput unless A has full column rank.
Transformation make_generic(const MeasurementModel& model, const Matrix& A);

/// Full-rank factorization H = B D via column-pivoted QR (B = I when H has full row rank).
struct FullRankFactors {
    Matrix B;
    Matrix D;
};
FullRankFactors full_rank_decomposition(const Matrix& H);

struct ClutterModel {
    double rate = 0.0;           // mean clutter count per scan
    double region_volume = 1.0;  // measurement-space volume of the surveillance region

    double density() const { return 1.0 / region_volume; }
    double log_density() const;
    void validate() const;
};

/// log N(z; z_hat, S). Throws NumericalError if S is not positive definite.
double log_gaussian_likelihood(const Vector& z, const Vector& z_hat, const Matrix& S);
double gaussian_likelihood(const Vector& z, const Vector& z_hat, const Matrix& S);

/// Degenerate Gaussian with pseudo-determinant and pseudoinverse. Throws
/// InconsistentTransform if zt - zt_hat leaves the range of St.
double log_generalized_likelihood(const Vector& zt, const Vector& zt_hat, const Matrix& St);
double generalized_likelihood(const Vector& zt, const Vector& zt_hat, const Matrix& St);

/// 0.5 * log det(A^T A). Throws InvalidInput if A is column-rank deficient.
double log_volume_scale(const Matrix& A);

/// Clutter density after z -> A z, i.e. density / sqrt(det(A^T A)).
double clutter_density_transformed(const ClutterModel& clutter, const Transformation& t);
double log_clutter_density_transformed(const ClutterModel& clutter, const Matrix& A);

}  // namespace trackfuse
