#include "trackfuse/linalg.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>

#include "trackfuse/errors.hpp"

namespace trackfuse {

Matrix symmetrize(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
    if (m.size() == 0) {
        return Matrix::Zero(m.cols(), m.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = rel_tol * sv(0);
    Vector inv = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            inv(i) = 1.0 / sv(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv(0) <= 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) {
            ++rank;
        }
    }
    return rank;
}

double inverse_condition(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv(0) <= 0.0) {
        return 0.0;
    }
    return sv(sv.size() - 1) / sv(0);
}

PsdSpectrum psd_spectrum(const Matrix& s, double rel_tol, double neg_tol) {
    if (s.rows() != s.cols()) {
        throw ConfigurationError("psd_spectrum: matrix is not square");
    }
    PsdSpectrum out;
    const Eigen::Index m = s.rows();
    if (m == 0) {
        out.pinv = Matrix(0, 0);
        out.range_basis = Matrix(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("psd_spectrum: eigendecomposition failed");
    }
    out.eigenvalues = eig.eigenvalues();
    out.eigenvectors = eig.eigenvectors();
    const double e_max = out.eigenvalues.cwiseAbs().maxCoeff();
    if (out.eigenvalues(0) < -neg_tol * e_max) {
        throw InvalidInput("psd_spectrum: matrix has a negative eigenvalue " +
                           std::to_string(out.eigenvalues(0)));
    }
    const double cutoff = rel_tol * e_max;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (out.eigenvalues(i) > cutoff && out.eigenvalues(i) > 0.0) {
            kept.push_back(i);
        }
    }
    out.rank = static_cast<int>(kept.size());
    out.range_basis.resize(m, out.rank);
    Vector inv(out.rank);
    for (int k = 0; k < out.rank; ++k) {
        const Eigen::Index i = kept[static_cast<std::size_t>(k)];
        out.range_basis.col(k) = out.eigenvectors.col(i);
        inv(k) = 1.0 / out.eigenvalues(i);
        out.log_pdet += std::log(out.eigenvalues(i));
    }
    out.pinv = symmetrize(out.range_basis * inv.asDiagonal() * out.range_basis.transpose());
    return out;
}

namespace {

Matrix spd_power(const Matrix& s, double clamp, bool inverse) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("spd_power: eigendecomposition failed");
    }
    Vector d = eig.eigenvalues().cwiseMax(clamp).cwiseSqrt();
    if (inverse) {
        d = d.cwiseInverse();
    }
    return symmetrize(eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose());
}

}  // namespace

Matrix spd_sqrt(const Matrix& s, double clamp) {
    return spd_power(s, clamp, false);
}

Matrix spd_inv_sqrt(const Matrix& s, double clamp) {
    return spd_power(s, clamp, true);
}

Matrix psd_factor(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("psd_factor: eigendecomposition failed");
    }
    const Vector d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * d.asDiagonal();
}

double relative_error(const Matrix& a, const Matrix& b) {
    const double diff = (a - b).norm();
    const double scale = b.norm();
    return scale > 0.0 ? diff / scale : diff;
}

double chi2_quantile(int dof, double probability) {
    if (dof < 1) {
        throw ConfigurationError("chi2_quantile: dof must be positive");
    }
    if (!(probability > 0.0 && probability < 1.0)) {
        throw ConfigurationError("chi2_quantile: probability must lie in (0, 1)");
    }
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::quantile(dist, probability);
}

}  // namespace trackfuse
