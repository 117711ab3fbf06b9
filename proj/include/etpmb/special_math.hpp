#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>

namespace etpmb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Digamma ψ(x) for x > 0.
double digamma(double x);

/// Trigamma ψ'(x) for x > 0.
double trigamma(double x);

/// ψ(x) − log(x), evaluated without the cancellation of the naive
/// difference for large x. Always negative.
double digamma_minus_log(double x);

/// log Γ_d(x) = d(d−1)/4·log π + Σ_{j=1..d} log Γ(x + (1−j)/2).
double log_multivariate_gamma(int d, double x);

/// Regularized lower incomplete gamma P(s, x).
double regularized_gamma_p(double s, double x);

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi2_quantile(int dof, double prob);

/// Symmetric positive-definite square root via eigendecomposition.
Matrix spd_sqrt(const Matrix& m);

/// log det of an SPD matrix (Cholesky). Throws DomainError if not PD.
double log_det_spd(const Matrix& m);

/// Returns true when `m` is symmetric to `rel_tol` and all eigenvalues > 0.
bool is_spd(const Matrix& m, double rel_tol = 1e-12);

/// Solves ψ(a) − log a = c for a > 0 (c < 0). Residual < 1e-10.
double solve_gamma_shape(double c);

/// Solves Σ_{j=1..d} ψ((v−d−j)/2) + d·log 2 − d·log(v−d−1) + logdet_c1 = rhs
/// for v in (2d+2, 1e6). Throws ConvergenceError when no root is bracketed.
double solve_iw_dof(int d, double rhs, double logdet_c1);

/// The left-hand side of the solve_iw_dof equation minus logdet_c1, in a
/// cancellation-free form.
double iw_dof_statistic(int d, double v);

/// Adaptive 7/15-point Gauss–Kronrod integration of f over the panels
/// defined by consecutive `breakpoints`. Stops when the estimated absolute
/// error is below rel_tol·|integral| or `max_intervals` is reached. Features
/// narrower than a panel must be bracketed by breakpoints.
double integrate_adaptive(const std::function<double(double)>& f,
                          std::span<const double> breakpoints,
                          double rel_tol = 1e-10,
                          int max_intervals = 400);

} // namespace etpmb
