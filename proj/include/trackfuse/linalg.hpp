#pragma once

#include <Eigen/Dense>

namespace trackfuse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative cutoff below which singular values / eigenvalues count as zero.
inline constexpr double kRankTolerance = 1e-12;

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// `rel_tol * sigma_max` are treated as zero.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = kRankTolerance);

/// Numerical rank from the singular values.
int numerical_rank(const Matrix& m, double rel_tol = kRankTolerance);

/// Smallest singular value over the largest; 0 for an empty or zero matrix.
double inverse_condition(const Matrix& m);

/// Spectral summary of a symmetric positive semidefinite matrix.
struct PsdSpectrum {
    Vector eigenvalues;   // ascending, as returned by the eigensolver
    Matrix eigenvectors;  // columns
    int rank = 0;         // eigenvalues above rel_tol * max
    double log_pdet = 0;  // sum of log of the retained eigenvalues
    Matrix pinv;          // pseudoinverse built from the retained eigenpairs
    Matrix range_basis;   // retained eigenvectors
};

/// Decomposes a symmetric PSD matrix. Throws InvalidInput when an eigenvalue is
/// more negative than `neg_tol * max(|eigenvalue|)`.
PsdSpectrum psd_spectrum(const Matrix& s, double rel_tol = kRankTolerance, double neg_tol = 1e-10);

/// Principal square root of a symmetric positive definite matrix through its
/// eigendecomposition; eigenvalues are clamped at `clamp` from below.
Matrix spd_sqrt(const Matrix& s, double clamp = 1e-14);
Matrix spd_inv_sqrt(const Matrix& s, double clamp = 1e-14);

/// A factor L with L L^T = S for symmetric PSD S (eigen-based, works for singular S).
Matrix psd_factor(const Matrix& s);

/// ||a - b||_F / ||b||_F, falling back to the absolute norm when b is zero.
double relative_error(const Matrix& a, const Matrix& b);

/// Upper quantile of the chi-square distribution.
double chi2_quantile(int dof, double probability);

}  // namespace trackfuse
