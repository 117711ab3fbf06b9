#include "etpmb/ggiw.hpp"
#include "etpmb/ggiw_merge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace etpmb {

namespace {

constexpr double kRegularization = 1e-10;

Matrix regularized(const Matrix& m) {
    return m + kRegularization * Matrix::Identity(m.rows(), m.cols());
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double extent_mean_denominator(const InverseWishartExtent& ext) {
    const int d = static_cast<int>(ext.V.rows());
    return ext.v - 2.0 * d - 2.0;
}

} // namespace

Matrix transition_matrix(int d, double T) {
    Matrix F = Matrix::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        F(2 * i, 2 * i) = 1.0;
        F(2 * i, 2 * i + 1) = T;
        F(2 * i + 1, 2 * i + 1) = 1.0;
    }
    return F;
}

Matrix process_noise(int d, double T, double sigma_v) {
    Matrix Q = Matrix::Zero(2 * d, 2 * d);
    const double s2 = sigma_v * sigma_v;
    for (int i = 0; i < d; ++i) {
        Q(2 * i, 2 * i) = s2 * std::pow(T, 4) / 4.0;
        Q(2 * i, 2 * i + 1) = s2 * std::pow(T, 3) / 2.0;
        Q(2 * i + 1, 2 * i) = s2 * std::pow(T, 3) / 2.0;
        Q(2 * i + 1, 2 * i + 1) = s2 * T * T;
    }
    return Q;
}

Matrix measurement_matrix(int state_dim, int d) {
    if (d < 1 || state_dim % d != 0) {
        throw DomainError("measurement_matrix: state dimension must be a multiple of d");
    }
    const int stride = state_dim / d;
    Matrix H = Matrix::Zero(d, state_dim);
    for (int i = 0; i < d; ++i) H(i, i * stride) = 1.0;
    return H;
}

GGIWDensity ggiw_predict(const GGIWDensity& prior, const MotionConfig& cfg) {
    const int d = prior.extent_dim();
    if (prior.state_dim() != 2 * d) {
        throw DomainError("ggiw_predict: constant-velocity model needs state_dim = 2d");
    }
    GGIWDensity out = prior;
    const Matrix F = transition_matrix(d, cfg.T);
    out.kin.m = F * prior.kin.m;
    out.kin.P = symmetrized(F * prior.kin.P * F.transpose() + process_noise(d, cfg.T, cfg.sigma_v));

    const double decay = std::exp(-cfg.T / cfg.extent_tau);
    const double floor_dof = 2.0 * d + 2.0;
    out.ext.v = floor_dof + decay * (prior.ext.v - floor_dof);
    // Mean-preserving rescale: V⁺/(v⁺ − 2d − 2) = V/(v − 2d − 2).
    out.ext.V = decay * prior.ext.V;

    out.gamma.a = prior.gamma.a / cfg.gamma_forgetting;
    out.gamma.b = prior.gamma.b / cfg.gamma_forgetting;
    return out;
}

double effective_miss_prob(const GammaParams& gamma, double pd) {
    return 1.0 - pd + pd * std::exp(gamma.a * std::log(gamma.b / (gamma.b + 1.0)));
}

GGIWDensity ggiw_miss_update(const GGIWDensity& prior, double pd) {
    const double detected_empty = pd * std::exp(prior.gamma.a *
                                                std::log(prior.gamma.b / (prior.gamma.b + 1.0)));
    const std::array<double, 2> weights = {1.0 - pd, detected_empty};
    const std::array<GammaParams, 2> comps = {
        prior.gamma, GammaParams{prior.gamma.a, prior.gamma.b + 1.0}};
    GGIWDensity out = prior;
    out.gamma = gamma_merge(weights, comps);
    return out;
}

namespace {

double giw_log_marginal(const GGIWDensity& prior, const MeasurementCell& cell) {
    const int d = prior.extent_dim();
    const int n = static_cast<int>(cell.cols());
    const Matrix H = measurement_matrix(prior.state_dim(), d);

    const Vector zbar = cell.rowwise().mean();
    const Matrix centered = cell.colwise() - zbar;
    const Matrix B = symmetrized(prior.ext.V + centered * centered.transpose());
    const Vector eps = zbar - H * prior.kin.m;
    const Matrix sigma = symmetrized(H * prior.kin.P * H.transpose());

    const double nu = prior.ext.v - d - 1.0;
    const double k = 0.5 * (nu + n);

    Eigen::LLT<Matrix> llt(B);
    if (llt.info() != Eigen::Success) {
        throw DomainError("ggiw_cell_update: extent scale is not positive definite");
    }
    const Matrix L = llt.matrixL();
    const double logdet_b = 2.0 * L.diagonal().array().log().sum();
    const Vector w = L.triangularView<Eigen::Lower>().solve(eps);
    const Matrix half = L.triangularView<Eigen::Lower>().solve(sigma);
    const Matrix whitened = symmetrized(L.triangularView<Eigen::Lower>().solve(half.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened);
    const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
    const Vector eta2 = (eig.eigenvectors().transpose() * w).array().square();

    // (1 + n εᵀB⁻¹ε)^{−k} = ∫ Gamma(t; k, 1) e^{−t n εᵀB⁻¹ε} dt; the centroid
    // expectation of the exponential is closed form.
    const double lgk = std::lgamma(k);
    auto log_integrand = [&](double t) {
        double acc = (k - 1.0) * std::log(t) - t - lgk;
        for (int i = 0; i < d; ++i) {
            const double denom = 1.0 + 2.0 * t * n * lambda(i);
            acc += -0.5 * std::log(denom) - t * n * eta2(i) / denom;
        }
        return acc;
    };

    const double spread = std::sqrt(k);
    const double mode = std::max(k - 1.0, 0.0);
    const double upper = k + 40.0 * spread + 50.0;
    std::vector<double> points = {0.0, upper};
    for (double t = 1e-10; t < upper; t *= 10.0) points.push_back(t);
    for (double offset : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double t = mode + offset * spread;
        if (t > 0.0 && t < upper) points.push_back(t);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points.size(); ++i) {
        shift = std::max(shift, log_integrand(points[i]));
        shift = std::max(shift, log_integrand(0.5 * (points[i - 1] + points[i])));
    }
    const double integral = integrate_adaptive(
        [&](double t) { return t > 0.0 ? std::exp(log_integrand(t) - shift) : 0.0; },
        points, 1e-10, 600);

    return -0.5 * n * d * std::log(std::numbers::pi) + 0.5 * nu * log_det_spd(prior.ext.V) -
           k * logdet_b + log_multivariate_gamma(d, k) - log_multivariate_gamma(d, 0.5 * nu) +
           shift + std::log(integral);
}

void require_cell(const GGIWDensity& prior, const MeasurementCell& cell) {
    if (cell.cols() < 1) throw DomainError("ggiw_cell_update: empty cell");
    if (cell.rows() != prior.extent_dim()) {
        throw DomainError("ggiw_cell_update: measurement dimension differs from extent dimension");
    }
}

} // namespace

double ggiw_cell_log_likelihood(const GGIWDensity& prior, const MeasurementCell& cell,
                                const SensorConfig& sensor) {
    require_cell(prior, cell);
    const double n = static_cast<double>(cell.cols());
    const double a = prior.gamma.a;
    const double b = prior.gamma.b;
    const double gamma_term = std::lgamma(a + n) - std::lgamma(a) + a * std::log(b) -
                              (a + n) * std::log(b + 1.0);
    return std::log(sensor.pd) + gamma_term + giw_log_marginal(prior, cell);
}

CellUpdate ggiw_cell_update(const GGIWDensity& prior, const MeasurementCell& cell,
                            const SensorConfig& sensor) {
    require_cell(prior, cell);
    const int d = prior.extent_dim();
    const int n = static_cast<int>(cell.cols());
    const Matrix H = measurement_matrix(prior.state_dim(), d);

    const Vector zbar = cell.rowwise().mean();
    const Matrix centered = cell.colwise() - zbar;
    const Matrix Z = centered * centered.transpose();
    const Vector eps = zbar - H * prior.kin.m;

    const Matrix x_hat = prior.ext.V / extent_mean_denominator(prior.ext);
    const Matrix S = regularized(symmetrized(H * prior.kin.P * H.transpose() + x_hat / n));
    Eigen::LLT<Matrix> s_llt(S);
    const Matrix K = s_llt.solve(H * prior.kin.P.transpose()).transpose();

    const Matrix s_sqrt_inv = spd_sqrt(S).inverse();
    const Matrix x_sqrt = spd_sqrt(x_hat);
    const Vector innov = x_sqrt * s_sqrt_inv * eps;

    CellUpdate out;
    out.posterior.gamma = GammaParams{prior.gamma.a + n, prior.gamma.b + 1.0};
    out.posterior.kin.m = prior.kin.m + K * eps;
    out.posterior.kin.P = symmetrized(prior.kin.P - K * S * K.transpose());
    out.posterior.ext.v = prior.ext.v + n;
    out.posterior.ext.V = symmetrized(prior.ext.V + Z + innov * innov.transpose());
    out.log_lik = ggiw_cell_log_likelihood(prior, cell, sensor);
    return out;
}

ExtendedEstimate ggiw_expected_value(const GGIWDensity& density) {
    const double denom = extent_mean_denominator(density.ext);
    if (!(denom > 0.0)) {
        throw DomainError("ggiw_expected_value: extent mean needs v > 2d + 2");
    }
    return ExtendedEstimate{density.gamma.a / density.gamma.b, density.kin.m,
                            density.ext.V / denom};
}

double gaussian_cross_entropy(const GaussianKinematics& p, const GaussianKinematics& q) {
    const double n = static_cast<double>(p.m.size());
    const Matrix pq = regularized(q.P);
    Eigen::LLT<Matrix> llt(pq);
    if (llt.info() != Eigen::Success) {
        throw DomainError("gaussian_cross_entropy: covariance is not positive definite");
    }
    const Vector delta = p.m - q.m;
    const Matrix second = p.P + delta * delta.transpose();
    const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    return 0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * logdet +
           0.5 * llt.solve(second).trace();
}

double gamma_cross_entropy(const GammaParams& p, const GammaParams& q) {
    const double expected_log = digamma(p.a) - std::log(p.b);
    return -(q.a * std::log(q.b) - std::lgamma(q.a) + (q.a - 1.0) * expected_log -
             q.b * p.a / p.b);
}

double iw_cross_entropy(const InverseWishartExtent& p, const InverseWishartExtent& q) {
    const int d = static_cast<int>(p.V.rows());
    const double nu_q = q.v - d - 1.0;
    double psi_sum = 0.0;
    for (int j = 1; j <= d; ++j) psi_sum += digamma(0.5 * (p.v - d - j));
    const double expected_logdet = log_det_spd(p.V) - d * std::log(2.0) - psi_sum;
    const Eigen::LLT<Matrix> p_llt(regularized(p.V));
    const double trace = (p.v - d - 1.0) * p_llt.solve(q.V).trace();
    const double value = -0.5 * nu_q * d * std::log(2.0) + 0.5 * nu_q * log_det_spd(q.V) -
                         log_multivariate_gamma(d, 0.5 * nu_q) - 0.5 * q.v * expected_logdet -
                         0.5 * trace;
    return -value;
}

double ggiw_cross_entropy(const GGIWDensity& p, const GGIWDensity& q) {
    return gaussian_cross_entropy(p.kin, q.kin) + gamma_cross_entropy(p.gamma, q.gamma) +
           iw_cross_entropy(p.ext, q.ext);
}

double ggiw_kl(const GGIWDensity& p, const GGIWDensity& q) {
    return std::max(0.0, ggiw_cross_entropy(p, q) - ggiw_cross_entropy(p, p));
}

double ggiw_skl(const GGIWDensity& p, const GGIWDensity& q) {
    return ggiw_kl(p, q) + ggiw_kl(q, p);
}

} // namespace etpmb
