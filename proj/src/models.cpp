#include "trackfuse/models.hpp"

#include <cmath>
#include <sstream>

#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigurationError(what);
    }
}

}  // namespace

MotionModel MotionModel::constant_velocity(double dt, double q) {
    Matrix f1(2, 2);
    f1 << 1.0, dt, 0.0, 1.0;
    Matrix g1(2, 1);
    g1 << 0.5 * dt * dt, dt;
    const Matrix i2 = Matrix::Identity(2, 2);

    MotionModel out;
    out.F = Matrix::Zero(4, 4);
    Matrix G = Matrix::Zero(4, 2);
    // Kronecker products written out for the 2x2 identity.
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            out.F.block(2 * r, 2 * c, 2, 2) = f1(r, c) * i2;
        }
        G.block(2 * r, 0, 2, 2) = g1(r, 0) * i2;
    }
    out.Q = symmetrize(G * G.transpose() * (q * q));
    return out;
}

void MotionModel::validate() const {
    require(F.rows() == F.cols(), "motion model: F is not square");
    require(Q.rows() == F.rows() && Q.cols() == F.cols(), "motion model: Q does not match F");
    require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()),
            "motion model: Q is not symmetric");
    if (Q.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(Q));
        require(eig.eigenvalues()(0) >= -1e-10 * (1.0 + eig.eigenvalues().cwiseAbs().maxCoeff()),
                "motion model: Q is not positive semidefinite");
    }
}

void MeasurementModel::validate() const {
    require(R.rows() == H.rows() && R.cols() == H.rows(), "measurement model: R does not match H");
    require((R - R.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + R.cwiseAbs().maxCoeff()),
            "measurement model: R is not symmetric");
    Eigen::LLT<Matrix> llt(symmetrize(R));
    require(llt.info() == Eigen::Success, "measurement model: R is not positive definite");
}

GaussianEstimate predict(const GaussianEstimate& est, const MotionModel& model) {
    const Eigen::Index n = est.mean.size();
    if (model.F.rows() != n || model.F.cols() != n || est.cov.rows() != n || est.cov.cols() != n ||
        model.Q.rows() != n || model.Q.cols() != n) {
        throw ConfigurationError("predict: dimension mismatch");
    }
    GaussianEstimate out;
    out.mean = model.F * est.mean;
    out.cov = symmetrize(model.F * est.cov * model.F.transpose() + model.Q);
    out.timestamp = est.timestamp + 1;
    return out;
}

Innovation innovation(const GaussianEstimate& est_pred, const MeasurementModel& model) {
    if (model.H.cols() != est_pred.mean.size() || model.R.rows() != model.H.rows() ||
        est_pred.cov.rows() != est_pred.mean.size()) {
        throw ConfigurationError("innovation: dimension mismatch");
    }
    Innovation out;
    out.z_hat = model.H * est_pred.mean;
    out.S = symmetrize(model.H * est_pred.cov * model.H.transpose() + model.R);
    return out;
}

GaussianEstimate update_raw(const GaussianEstimate& est_pred, const Vector& z, const MeasurementModel& model) {
    if (z.size() != model.H.rows()) {
        throw ConfigurationError("update_raw: measurement has wrong dimension");
    }
    const Innovation inn = innovation(est_pred, model);
    Eigen::LDLT<Matrix> ldlt(inn.S);
    const double rcond = inverse_condition(inn.S);
    if (ldlt.info() != Eigen::Success || rcond < 1e-14) {
        std::ostringstream msg;
        msg << "update_raw: singular innovation covariance (inverse condition " << rcond << ")";
        throw NumericalError(msg.str());
    }
    const Matrix PHt = est_pred.cov * model.H.transpose();
    const Matrix K = ldlt.solve(PHt.transpose()).transpose();
    const Eigen::Index n = est_pred.mean.size();
    const Matrix IKH = Matrix::Identity(n, n) - K * model.H;

    GaussianEstimate out;
    out.mean = est_pred.mean + K * (z - inn.z_hat);
    out.cov = symmetrize(IKH * est_pred.cov * IKH.transpose() + K * model.R * K.transpose());
    out.timestamp = est_pred.timestamp;
    return out;
}

std::pair<Matrix, Vector> measurement_information(const Vector& z, const Matrix& H, const Matrix& R) {
    if (R.rows() != H.rows() || R.cols() != H.rows() || z.size() != H.rows()) {
        throw ConfigurationError("measurement_information: dimension mismatch");
    }
    // Rejects indefinite R; the retained-eigenpair pseudoinverse is used below.
    const PsdSpectrum spec = psd_spectrum(R);
    const Matrix HtRp = H.transpose() * spec.pinv;
    return {symmetrize(HtRp * H), HtRp * z};
}

GaussianEstimate update_transformed(const GaussianEstimate& est_pred, const Vector& zt, const Matrix& Ht,
                                    const Matrix& Rt) {
    const Eigen::Index n = est_pred.mean.size();
    if (Ht.cols() != n) {
        throw ConfigurationError("update_transformed: Ht has wrong column count");
    }
    if (Rt.rows() != Ht.rows() || Rt.cols() != Ht.rows() || zt.size() != Ht.rows()) {
        throw ConfigurationError("update_transformed: dimension mismatch");
    }
    const PsdSpectrum spec = psd_spectrum(Rt);
    if (spec.rank == Rt.rows() && Rt.rows() > 0) {
        MeasurementModel model{Ht, symmetrize(Rt), 0};
        return update_raw(est_pred, zt, model);
    }
    const Matrix HtRp = Ht.transpose() * spec.pinv;
    const Matrix info_meas = symmetrize(HtRp * Ht);
    const Vector vec_meas = HtRp * zt;

    Eigen::LDLT<Matrix> prior(est_pred.cov);
    if (prior.info() != Eigen::Success || inverse_condition(est_pred.cov) < 1e-15) {
        throw NumericalError("update_transformed: prior covariance is singular");
    }
    const Matrix Y0 = symmetrize(prior.solve(Matrix::Identity(n, n)));
    const Matrix Y = symmetrize(Y0 + info_meas);
    Eigen::LDLT<Matrix> post(Y);
    if (post.info() != Eigen::Success) {
        throw NumericalError("update_transformed: posterior information is singular");
    }
    GaussianEstimate out;
    out.cov = symmetrize(post.solve(Matrix::Identity(n, n)));
    out.mean = post.solve(Y0 * est_pred.mean + vec_meas);
    out.timestamp = est_pred.timestamp;
    return out;
}

}  // namespace trackfuse
