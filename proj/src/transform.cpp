#include "trackfuse/transform.hpp"

#include <cmath>

#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_model(const MeasurementModel& model) {
    if (model.R.rows() != model.H.rows() || model.R.cols() != model.H.rows()) {
        throw ConfigurationError("transform: R does not match H");
    }
}

bool full_column_rank(const Matrix& A) {
    if (A.cols() == 0 || A.rows() < A.cols()) {
        return false;
    }
    Eigen::JacobiSVD<Matrix> svd(A);
    const Vector& sv = svd.singularValues();
    return sv(0) > 0.0 && sv(sv.size() - 1) > 1e-10 * sv(0);
}

}  // namespace

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::Identity: return "identity";
        case TransformKind::Type1: return "type1";
        case TransformKind::Type2: return "type2";
        case TransformKind::GenericFullColumnRank: return "generic";
    }
    return "unknown";
}

Transformation make_identity(const MeasurementModel& model) {
    check_model(model);
    Transformation t;
    t.kind = TransformKind::Identity;
    t.A = Matrix::Identity(model.m(), model.m());
    t.Ht = model.H;
    t.Rt = symmetrize(model.R);
    return t;
}

FullRankFactors full_rank_decomposition(const Matrix& H) {
    const int r = numerical_rank(H);
    FullRankFactors out;
    if (r == H.rows()) {
        out.B = Matrix::Identity(H.rows(), H.rows());
        out.D = H;
        return out;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(H);
    const Matrix Q = qr.householderQ() * Matrix::Identity(H.rows(), r);
    const Matrix Rtri = qr.matrixR().topRows(r).triangularView<Eigen::Upper>();
    out.B = Q;
    out.D = Rtri * qr.colsPermutation().transpose();
    return out;
}

Transformation make_type1(const MeasurementModel& model) {
    check_model(model);
    const FullRankFactors f = full_rank_decomposition(model.H);
    Eigen::LLT<Matrix> llt(symmetrize(model.R));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("make_type1: R is not positive definite");
    }
    const Matrix RinvB = llt.solve(f.B);
    const Matrix M = symmetrize(f.B.transpose() * RinvB);
    if (M.size() == 0 || numerical_rank(M) < M.rows()) {
        throw NumericalError("make_type1: B^T R^-1 B is rank deficient");
    }
    Transformation t;
    t.kind = TransformKind::Type1;
    t.A = spd_inv_sqrt(M) * RinvB.transpose();
    t.Ht = spd_sqrt(M) * f.D;
    t.Rt = Matrix::Identity(M.rows(), M.rows());
    return t;
}

Transformation make_type2(const MeasurementModel& model) {
    check_model(model);
    const Eigen::Index m = model.H.rows();
    const Eigen::Index n = model.H.cols();
    if (n < m) {
        throw InvalidInput("make_type2: H has fewer columns than rows");
    }
    const Matrix E = model.H.leftCols(m);
    const Matrix right = model.H.rightCols(n - m);
    if (right.size() > 0 && right.cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidInput("make_type2: H is not of the form [E, 0]");
    }
    Eigen::FullPivLU<Matrix> lu(E);
    if (!lu.isInvertible() || inverse_condition(E) < 1e-12) {
        throw InvalidInput("make_type2: E is singular");
    }
    Transformation t;
    t.kind = TransformKind::Type2;
    t.A = lu.inverse();
    t.Ht = Matrix::Zero(m, n);
    t.Ht.leftCols(m).setIdentity();
    t.Rt = symmetrize(t.A * model.R * t.A.transpose());
    return t;
}

Transformation make_generic(const MeasurementModel& model, const Matrix& A) {
    check_model(model);
    if (A.cols() != model.H.rows()) {
        throw ConfigurationError("make_generic: A has wrong column count");
    }
    if (!full_column_rank(A)) {
        throw InvalidInput("make_generic: A is not full column rank");
    }
    Transformation t;
    t.kind = TransformKind::GenericFullColumnRank;
    t.A = A;
    t.Ht = A * model.H;
    t.Rt = symmetrize(A * model.R * A.transpose());
    return t;
}

double ClutterModel::log_density() const {
    return -std::log(region_volume);
}

void ClutterModel::validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ConfigurationError("clutter: rate must be positive");
    }
    if (!(region_volume > 0.0) || !std::isfinite(region_volume)) {
        throw ConfigurationError("clutter: region volume must be positive");
    }
}

double log_gaussian_likelihood(const Vector& z, const Vector& z_hat, const Matrix& S) {
    if (z.size() != z_hat.size() || S.rows() != z.size() || S.cols() != z.size()) {
        throw ConfigurationError("gaussian_likelihood: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(symmetrize(S));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gaussian_likelihood: covariance is not positive definite");
    }
    const Vector w = llt.matrixL().solve(z - z_hat);
    const Matrix L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(z.size()) * kLog2Pi + log_det + w.squaredNorm());
}

double gaussian_likelihood(const Vector& z, const Vector& z_hat, const Matrix& S) {
    return std::exp(log_gaussian_likelihood(z, z_hat, S));
}

double log_generalized_likelihood(const Vector& zt, const Vector& zt_hat, const Matrix& St) {
    if (zt.size() != zt_hat.size() || St.rows() != zt.size() || St.cols() != zt.size()) {
        throw ConfigurationError("generalized_likelihood: dimension mismatch");
    }
    const PsdSpectrum spec = psd_spectrum(St);
    if (spec.rank == 0) {
        throw NumericalError("generalized_likelihood: covariance is zero");
    }
    const Vector d = zt - zt_hat;
    const Vector in_range = spec.range_basis * (spec.range_basis.transpose() * d);
    if ((d - in_range).norm() > 1e-8 * d.norm()) {
        throw InconsistentTransform("generalized_likelihood: innovation outside the range of the covariance");
    }
    const double quad = d.dot(spec.pinv * d);
    return -0.5 * (static_cast<double>(spec.rank) * kLog2Pi + spec.log_pdet + quad);
}

double generalized_likelihood(const Vector& zt, const Vector& zt_hat, const Matrix& St) {
    return std::exp(log_generalized_likelihood(zt, zt_hat, St));
}

double log_volume_scale(const Matrix& A) {
    if (!full_column_rank(A)) {
        throw InvalidInput("log_volume_scale: A is not full column rank");
    }
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues().array().log().sum();
}

double log_clutter_density_transformed(const ClutterModel& clutter, const Matrix& A) {
    return clutter.log_density() - log_volume_scale(A);
}

double clutter_density_transformed(const ClutterModel& clutter, const Transformation& t) {
    return std::exp(log_clutter_density_transformed(clutter, t.A));
}

}  // namespace trackfuse
