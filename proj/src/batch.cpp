#include "trackfuse/batch.hpp"

#include <cmath>
#include <numbers>

#include "trackfuse/errors.hpp"

namespace trackfuse {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) {
        a += 2.0 * std::numbers::pi;
    }
    return a;
}

bool FieldOfView::contains(double px, double py) const {
    const double dx = px - x;
    const double dy = py - y;
    if (dx * dx + dy * dy > range * range) {
        return false;
    }
    return std::abs(wrap_angle(std::atan2(dy, dx) - boresight)) <= half_angle;
}

ClutterModel MeasurementBatch::clutter() const {
    ClutterModel c;
    c.rate = clutter_rate;
    c.region_volume = std::exp(-log_clutter_density);
    return c;
}

Transformation batch_transformation(const MeasurementBatch& raw, TransformKind kind, const Matrix* generic_A) {
    if (raw.encoding != TransformKind::Identity) {
        throw InvalidInput("encode_batch: batch is already transformed");
    }
    const MeasurementModel model{raw.H, raw.R, raw.sensor_id};
    switch (kind) {
        case TransformKind::Identity: return make_identity(model);
        case TransformKind::Type1: return make_type1(model);
        case TransformKind::Type2: return make_type2(model);
        case TransformKind::GenericFullColumnRank:
            if (generic_A == nullptr) {
                throw ConfigurationError("encode_batch: generic transform needs a matrix");
            }
            return make_generic(model, *generic_A);
    }
    throw ConfigurationError("encode_batch: unknown transform kind");
}

MeasurementBatch encode_batch(const MeasurementBatch& raw, TransformKind kind, const Matrix* generic_A) {
    if (kind == TransformKind::Identity) {
        return raw;
    }
    const Transformation t = batch_transformation(raw, kind, generic_A);
    MeasurementBatch out = raw;
    out.encoding = kind;
    out.H = t.Ht;
    out.R = t.Rt;
    out.log_clutter_density = raw.log_clutter_density - log_volume_scale(t.A);
    for (auto& z : out.z) {
        z = t.apply(z);
    }
    return out;
}

double batch_log_likelihood(const MeasurementBatch& batch, const Vector& z, const Vector& z_hat, const Matrix& S) {
    if (batch.encoding == TransformKind::Identity) {
        return log_gaussian_likelihood(z, z_hat, S);
    }
    return log_generalized_likelihood(z, z_hat, S);
}

BatchLikelihood::BatchLikelihood(const MeasurementBatch& batch) : batch_(&batch) {
    if (batch.encoding == TransformKind::Identity) {
        Eigen::LLT<Matrix> llt(symmetrize(batch.R));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("BatchLikelihood: R is not positive definite");
        }
        const Matrix L = llt.matrixL();
        W_ = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(batch.R.rows(), batch.R.cols()));
        const double log_det = 2.0 * L.diagonal().array().log().sum();
        log_norm_ = -0.5 * (static_cast<double>(batch.R.rows()) * kLog2Pi + log_det);
    } else {
        const PsdSpectrum spec = psd_spectrum(batch.R);
        Vector s(spec.rank);
        for (int k = 0; k < spec.rank; ++k) {
            s(k) = 1.0 / std::sqrt(spec.range_basis.col(k).dot(batch.R * spec.range_basis.col(k)));
        }
        W_ = s.asDiagonal() * spec.range_basis.transpose();
        log_norm_ = -0.5 * (static_cast<double>(spec.rank) * kLog2Pi + spec.log_pdet);
    }
    WH_ = W_ * batch.H;
    Wz_.reserve(batch.z.size());
    for (const auto& z : batch.z) {
        Wz_.push_back(W_ * z);
    }
}

double BatchLikelihood::log_likelihood(std::size_t i, const Eigen::Ref<const Vector>& x) const {
    const Vector r = Wz_[i] - WH_ * x;
    return log_norm_ - 0.5 * r.squaredNorm();
}

void BatchLikelihood::log_likelihood_all(std::size_t i, const Matrix& states, Eigen::Ref<Vector> out) const {
    const Matrix r = (WH_ * states).colwise() - Wz_[i];
    out = (log_norm_ - 0.5 * r.colwise().squaredNorm().array()).matrix().transpose();
}

}  // namespace trackfuse
