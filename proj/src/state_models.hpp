#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pmbm {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

/// Gaussian kinematic belief over [x, y, vx, vy] (m, m, m/s, m/s).
struct StateEstimate {
    Vec4 mean = Vec4::Zero();
    Mat4 covariance = Mat4::Identity();
};

struct MotionParams {
    double process_noise_intensity = 1.0;  ///< q, m^2/s^3 (white-noise acceleration)
    double survival_probability = 0.99;    ///< P_s in [0, 1]
};

struct MeasurementParams {
    Mat2 measurement_noise = Mat2::Identity() * 0.09;  ///< R, m^2
    double detection_probability = 0.9;                ///< P_d in [0, 1]
    double clutter_intensity = 5e-4;  ///< expected false alarms per m^2 per frame
    double gate_threshold = 9.21;     ///< squared Mahalanobis, chi^2(2 dof) at 0.99
};

/// A 2D position measurement in the global frame.
struct Measurement {
    Vec2 z = Vec2::Zero();
};

struct KalmanResult {
    StateEstimate state;
    double log_likelihood = 0.0;  ///< log N(z; H mean, S)
};

/// Constant-velocity transition matrix for [x, y, vx, vy].
Mat4 cv_transition(double dt);

/// White-noise-acceleration process noise, per-axis blocks
/// [dt^3/3, dt^2/2; dt^2/2, dt] * q.
Mat4 cv_process_noise(double q, double dt);

/// Predict the state dt seconds forward under the constant-velocity model.
/// Throws std::invalid_argument for dt <= 0.
StateEstimate cv_predict(const StateEstimate& state, double dt, const MotionParams& params);

/// Kalman update against a position measurement (H selects [x, y]).
/// Joseph-form covariance update keeps the result PSD. Throws NumericalError
/// when the innovation covariance S = H P H^T + R is singular.
KalmanResult kalman_update(const StateEstimate& state, const Measurement& z,
                           const MeasurementParams& params);

/// Squared Mahalanobis distance of z from the predicted measurement,
/// (z - H mean)^T S^-1 (z - H mean). Throws NumericalError on singular S.
double mahalanobis_sq(const StateEstimate& state, const Measurement& z,
                      const MeasurementParams& params);

/// Indices of measurements with mahalanobis_sq <= gate_threshold, input order.
std::vector<std::size_t> gate(const StateEstimate& state,
                              const std::vector<Measurement>& measurements,
                              const MeasurementParams& params);

/// (P + P^T) / 2, applied after every update to suppress floating-point drift.
inline Mat4 symmetrize(const Mat4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace pmbm
