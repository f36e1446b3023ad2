#include <gtest/gtest.h>

#include "trackfuse/errors.hpp"
#include "trackfuse/models.hpp"
#include "trackfuse/rng.hpp"
#include "trackfuse/transform.hpp"

using namespace trackfuse;

namespace {

GaussianEstimate prior() {
    GaussianEstimate e;
    e.mean = Vector(4);
    e.mean << 10, -5, 1, 2;
    e.cov = Matrix::Identity(4, 4) * 4.0;
    e.cov(0, 2) = e.cov(2, 0) = 1.0;
    return e;
}

MeasurementModel position_sensor() {
    MeasurementModel m;
    m.H = Matrix::Zero(2, 4);
    m.H(0, 0) = 1.01;
    m.H(1, 1) = 0.98;
    m.R = Matrix::Identity(2, 2) * 25.0;
    m.R(1, 1) = 25.7;
    return m;
}

}  // namespace

TEST(Models, ConstantVelocityMatrices) {
    const MotionModel mm = MotionModel::constant_velocity(2.0, 0.5);
    Matrix F(4, 4);
    F << 1, 0, 2, 0, 0, 1, 0, 2, 0, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_EQ(mm.F, F);
    // q^2 [dt^4/4, dt^3/2; dt^3/2, dt^2] per axis.
    EXPECT_DOUBLE_EQ(mm.Q(0, 0), 0.25 * 4.0);
    EXPECT_DOUBLE_EQ(mm.Q(0, 2), 0.25 * 4.0);
    EXPECT_DOUBLE_EQ(mm.Q(2, 2), 0.25 * 4.0);
    EXPECT_DOUBLE_EQ(mm.Q(0, 1), 0.0);
}

TEST(Models, PredictMatchesFormula) {
    const MotionModel mm = MotionModel::constant_velocity(1.0, 0.1);
    const GaussianEstimate e = prior();
    const GaussianEstimate p = predict(e, mm);
    EXPECT_LT((p.mean - mm.F * e.mean).norm(), 1e-14);
    EXPECT_LT((p.cov - (mm.F * e.cov * mm.F.transpose() + mm.Q)).norm(), 1e-12);
    EXPECT_EQ(p.timestamp, e.timestamp + 1);
}

TEST(Models, UpdateRawMatchesInformationForm) {
    const GaussianEstimate e = prior();
    const MeasurementModel m = position_sensor();
    Vector z(2);
    z << 12, -3;
    const GaussianEstimate u = update_raw(e, z, m);
    const Matrix info = e.cov.inverse() + m.H.transpose() * m.R.inverse() * m.H;
    const Matrix P = info.inverse();
    const Vector x = P * (e.cov.inverse() * e.mean + m.H.transpose() * m.R.inverse() * z);
    EXPECT_LT((u.cov - P).norm(), 1e-10);
    EXPECT_LT((u.mean - x).norm(), 1e-10);
}

TEST(Models, TransformedUpdateEqualsRawUpdate) {
    const GaussianEstimate e = prior();
    const MeasurementModel m = position_sensor();
    Vector z(2);
    z << 12, -3;
    const GaussianEstimate u = update_raw(e, z, m);
    for (const Transformation& t : {make_type1(m), make_type2(m)}) {
        const GaussianEstimate v = update_transformed(e, t.apply(z), t.Ht, t.Rt);
        EXPECT_LT((v.mean - u.mean).norm(), 1e-9 * u.mean.norm());
        EXPECT_LT((v.cov - u.cov).norm(), 1e-9 * u.cov.norm());
    }
    // Tall A gives a singular transformed covariance.
    Matrix A(3, 2);
    A << 1, 0, 0, 1, 1, 1;
    const Transformation g = make_generic(m, A);
    const GaussianEstimate v = update_transformed(e, g.apply(z), g.Ht, g.Rt);
    EXPECT_LT((v.mean - u.mean).norm(), 1e-8 * u.mean.norm());
    EXPECT_LT((v.cov - u.cov).norm(), 1e-8 * u.cov.norm());
}

TEST(Models, DimensionMismatchThrows) {
    const GaussianEstimate e = prior();
    MeasurementModel m = position_sensor();
    Vector z(3);
    z << 1, 2, 3;
    EXPECT_THROW(update_raw(e, z, m), Error);
    m.R = Matrix::Identity(3, 3);
    EXPECT_THROW(m.validate(), ConfigurationError);
}

TEST(Models, MeasurementInformation) {
    const MeasurementModel m = position_sensor();
    Vector z(2);
    z << 1, 2;
    const auto [I, i] = measurement_information(z, m.H, m.R);
    EXPECT_LT((I - m.H.transpose() * m.R.inverse() * m.H).norm(), 1e-14);
    EXPECT_LT((i - m.H.transpose() * m.R.inverse() * z).norm(), 1e-14);
}
