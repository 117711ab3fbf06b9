#pragma once

#include "etpmb/special_math.hpp"

namespace etpmb {

/// Gamma prior on the Poisson measurement rate, GAM(γ; a, b) with mean a/b.
struct GammaParams {
    double a = 1.0;
    double b = 1.0;
};

/// Gaussian prior N(ξ; m, P) on the kinematic state.
struct GaussianKinematics {
    Vector m;
    Matrix P;
};

/// Inverse-Wishart prior IW_d(χ; v, V) on the extent, parametrized so that
/// E[χ] = V / (v − 2d − 2).
struct InverseWishartExtent {
    double v = 0.0;
    Matrix V;
};

/// Gamma × Gaussian × inverse-Wishart single extended target density.
struct GGIWDensity {
    GammaParams gamma;
    GaussianKinematics kin;
    InverseWishartExtent ext;

    int state_dim() const { return static_cast<int>(kin.m.size()); }
    int extent_dim() const { return static_cast<int>(ext.V.rows()); }
};

/// Measurements of one cell stored column-wise (d × n).
using MeasurementCell = Matrix;

struct MotionConfig {
    double T = 1.0;
    double sigma_v = 0.5;
    double extent_tau = 100.0;
    double ps = 0.99;
    /// Divisor η ≥ 1 applied to both Gamma parameters at prediction.
    double gamma_forgetting = 1.0;
};

struct SensorConfig {
    double pd = 0.9;
    double clutter_rate = 10.0;
    double clutter_density = 1.0 / 160000.0;
    /// Used by the simulator only; the filter treats the extent as dominant.
    Matrix meas_noise = 0.25 * Matrix::Identity(2, 2);

    double clutter_intensity() const { return clutter_rate * clutter_density; }
};

/// Block constant-velocity transition I_d ⊗ [[1, T], [0, 1]].
Matrix transition_matrix(int d, double T);

/// Process noise σ²·I_d ⊗ [[T⁴/4, T³/2], [T³/2, T²]].
Matrix process_noise(int d, double T, double sigma_v);

/// Position selector for the interleaved [p1, v1, p2, v2, ...] layout; the
/// identity when the state holds positions only.
Matrix measurement_matrix(int state_dim, int d);

GGIWDensity ggiw_predict(const GGIWDensity& prior, const MotionConfig& cfg);

/// 1 − pd + pd·(b/(b+1))^a.
double effective_miss_prob(const GammaParams& gamma, double pd);

GGIWDensity ggiw_miss_update(const GGIWDensity& prior, double pd);

struct CellUpdate {
    GGIWDensity posterior;
    double log_lik = 0.0;
};

/// Detection update by a nonempty cell. log_lik is log pd plus the log of
/// the marginal ∫ f(x) e^{−γ} Π γ N(z; Hξ, χ) dx.
CellUpdate ggiw_cell_update(const GGIWDensity& prior, const MeasurementCell& cell,
                            const SensorConfig& sensor);

/// The likelihood part of ggiw_cell_update alone.
double ggiw_cell_log_likelihood(const GGIWDensity& prior, const MeasurementCell& cell,
                                const SensorConfig& sensor);

struct ExtendedEstimate {
    double gamma_hat = 0.0;
    Vector xi_hat;
    Matrix chi_hat;
};

ExtendedEstimate ggiw_expected_value(const GGIWDensity& density);

/// −∫ p log q for each factor.
double gaussian_cross_entropy(const GaussianKinematics& p, const GaussianKinematics& q);
double gamma_cross_entropy(const GammaParams& p, const GammaParams& q);
double iw_cross_entropy(const InverseWishartExtent& p, const InverseWishartExtent& q);

/// −∫ p(x) log q(x) dx over the product density.
double ggiw_cross_entropy(const GGIWDensity& p, const GGIWDensity& q);

/// KL(p ‖ q), clamped at zero.
double ggiw_kl(const GGIWDensity& p, const GGIWDensity& q);

/// KL(p ‖ q) + KL(q ‖ p).
double ggiw_skl(const GGIWDensity& p, const GGIWDensity& q);

} // namespace etpmb
