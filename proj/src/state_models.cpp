#include "state_models.hpp"

#include "errors.hpp"

#include <cmath>
#include <sstream>

namespace pmbm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

// H extracts [x, y]; kept implicit as block operations below.

struct Innovation {
    Vec2 residual;
    Mat2 s;
    Mat2 s_inv;
    double log_det_s;
};

Innovation innovation_of(const StateEstimate& state, const Measurement& z,
                         const MeasurementParams& params) {
    Innovation inn;
    inn.residual = z.z - state.mean.head<2>();
    inn.s = state.covariance.topLeftCorner<2, 2>() + params.measurement_noise;
    const double det = inn.s(0, 0) * inn.s(1, 1) - inn.s(0, 1) * inn.s(1, 0);
    if (!std::isfinite(det) || det <= 0.0) {
        std::ostringstream msg;
        msg << "innovation covariance S is singular (det = " << det << ", S = [["
            << inn.s(0, 0) << ", " << inn.s(0, 1) << "], [" << inn.s(1, 0) << ", "
            << inn.s(1, 1) << "]])";
        throw NumericalError(msg.str());
    }
    inn.s_inv << inn.s(1, 1), -inn.s(0, 1), -inn.s(1, 0), inn.s(0, 0);
    inn.s_inv /= det;
    inn.log_det_s = std::log(det);
    return inn;
}

}  // namespace

Mat4 cv_transition(double dt) {
    Mat4 f = Mat4::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Mat4 cv_process_noise(double q, double dt) {
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    Mat4 qm = Mat4::Zero();
    qm(0, 0) = qm(1, 1) = q * dt3 / 3.0;
    qm(2, 2) = qm(3, 3) = q * dt;
    qm(0, 2) = qm(2, 0) = q * dt2 / 2.0;
    qm(1, 3) = qm(3, 1) = q * dt2 / 2.0;
    return qm;
}

StateEstimate cv_predict(const StateEstimate& state, double dt, const MotionParams& params) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("cv_predict: dt must be positive, got " + std::to_string(dt));
    }
    const Mat4 f = cv_transition(dt);
    StateEstimate out;
    out.mean = f * state.mean;
    out.covariance = symmetrize(f * state.covariance * f.transpose() +
                                cv_process_noise(params.process_noise_intensity, dt));
    return out;
}

KalmanResult kalman_update(const StateEstimate& state, const Measurement& z,
                           const MeasurementParams& params) {
    const Innovation inn = innovation_of(state, z, params);

    const Eigen::Matrix<double, 4, 2> k = state.covariance.leftCols<2>() * inn.s_inv;

    KalmanResult out;
    out.state.mean = state.mean + k * inn.residual;

    // Joseph form: (I - K H) P (I - K H)^T + K R K^T
    Mat4 i_kh = Mat4::Identity();
    i_kh.leftCols<2>() -= k;
    out.state.covariance = symmetrize(i_kh * state.covariance * i_kh.transpose() +
                                      k * params.measurement_noise * k.transpose());

    const double d2 = inn.residual.dot(inn.s_inv * inn.residual);
    out.log_likelihood = -0.5 * (d2 + inn.log_det_s) - kLog2Pi;
    return out;
}

double mahalanobis_sq(const StateEstimate& state, const Measurement& z,
                      const MeasurementParams& params) {
    const Innovation inn = innovation_of(state, z, params);
    return inn.residual.dot(inn.s_inv * inn.residual);
}

std::vector<std::size_t> gate(const StateEstimate& state,
                              const std::vector<Measurement>& measurements,
                              const MeasurementParams& params) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        if (mahalanobis_sq(state, measurements[i], params) <= params.gate_threshold) {
            kept.push_back(i);
        }
    }
    return kept;
}

}  // namespace pmbm
