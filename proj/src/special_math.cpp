#include "etpmb/special_math.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace etpmb {

namespace {

constexpr double kAsymptoticThreshold = 10.0;

// ψ(x) − log x for x >= kAsymptoticThreshold.
double digamma_minus_log_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli-number series: −1/(2x) − Σ B_{2k}/(2k x^{2k}).
    const double series =
        inv2 * (1.0 / 12.0 -
        inv2 * (1.0 / 120.0 -
        inv2 * (1.0 / 252.0 -
        inv2 * (1.0 / 240.0 -
        inv2 * (1.0 / 132.0 -
        inv2 * (691.0 / 32760.0 -
        inv2 * (1.0 / 12.0)))))));
    return -0.5 * inv - series;
}

double trigamma_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv2 * inv * (1.0 / 6.0 -
        inv2 * (1.0 / 30.0 -
        inv2 * (1.0 / 42.0 -
        inv2 * (1.0 / 30.0 -
        inv2 * (5.0 / 66.0 -
        inv2 * (691.0 / 2730.0 -
        inv2 * (7.0 / 6.0)))))));
    return inv + 0.5 * inv2 + series;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be positive and finite, got " +
                          std::to_string(x));
    }
}

} // namespace

double digamma_minus_log(double x) {
    require_positive(x, "digamma_minus_log");
    if (x >= kAsymptoticThreshold) {
        return digamma_minus_log_asymptotic(x);
    }
    double shifted = x;
    double harmonic = 0.0;
    while (shifted < kAsymptoticThreshold) {
        harmonic += 1.0 / shifted;
        shifted += 1.0;
    }
    return digamma_minus_log_asymptotic(shifted) + std::log(shifted / x) - harmonic;
}

double digamma(double x) {
    require_positive(x, "digamma");
    if (x >= kAsymptoticThreshold) {
        return digamma_minus_log_asymptotic(x) + std::log(x);
    }
    double shifted = x;
    double harmonic = 0.0;
    while (shifted < kAsymptoticThreshold) {
        harmonic += 1.0 / shifted;
        shifted += 1.0;
    }
    return digamma_minus_log_asymptotic(shifted) + std::log(shifted) - harmonic;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    double shifted = x;
    double acc = 0.0;
    while (shifted < kAsymptoticThreshold) {
        acc += 1.0 / (shifted * shifted);
        shifted += 1.0;
    }
    return acc + trigamma_asymptotic(shifted);
}

double log_multivariate_gamma(int d, double x) {
    if (d < 1) {
        throw DomainError("log_multivariate_gamma: dimension must be >= 1");
    }
    double acc = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
    for (int j = 1; j <= d; ++j) {
        const double arg = x + 0.5 * (1 - j);
        if (!(arg > 0.0)) {
            throw DomainError("log_multivariate_gamma: requires x > (d-1)/2");
        }
        acc += std::lgamma(arg);
    }
    return acc;
}

double regularized_gamma_p(double s, double x) {
    require_positive(s, "regularized_gamma_p");
    if (x <= 0.0) return 0.0;
    const double log_prefactor = s * std::log(x) - x - std::lgamma(s);
    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (s + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(log_prefactor);
    }
    // Lentz continued fraction for Q(s, x).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefactor) * h;
}

double chi2_quantile(int dof, double prob) {
    if (dof < 1 || !(prob > 0.0) || !(prob < 1.0)) {
        throw DomainError("chi2_quantile: need dof >= 1 and prob in (0,1)");
    }
    if (dof == 2) {
        return -2.0 * std::log1p(-prob);
    }
    const double s = 0.5 * dof;
    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * dof);
    while (regularized_gamma_p(s, 0.5 * hi) < prob) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(s, 0.5 * mid) < prob) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Matrix spd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) {
        throw ConvergenceError("spd_sqrt: eigendecomposition did not converge");
    }
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double log_det_spd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw DomainError("log_det_spd: matrix is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

bool is_spd(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
    if ((m - m.transpose()).norm() > rel_tol * scale) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0;
}

namespace {

// Safeguarded Newton for an increasing function g on (lo, hi) with
// g(lo) < 0 < g(hi). `step_scale` maps to the solver variable.
template <typename F, typename DF>
double safeguarded_newton(F g, DF dg, double lo, double hi, double x0,
                          double residual_tol, const char* what) {
    double x = std::clamp(x0, lo, hi);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double gx = g(x);
        if (std::abs(gx) < residual_tol) return x;
        if (gx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double next = x - gx / dg(x);
        if (!(next > lo && next < hi)) {
            // Geometric bisection keeps wide brackets over several decades cheap.
            next = (lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
            return next;
        }
        x = next;
    }
    throw ConvergenceError(std::string(what) + ": no convergence after 100 iterations");
}

} // namespace

double solve_gamma_shape(double c) {
    if (!(c < 0.0) || !std::isfinite(c)) {
        throw DomainError("solve_gamma_shape: target must be negative and finite");
    }
    // Minka's closed-form approximation as the starting point.
    const double s = -c;
    const double a0 = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    auto g = [c](double a) { return digamma_minus_log(a) - c; };
    auto dg = [](double a) { return trigamma(a) - 1.0 / a; };
    double lo = a0;
    double hi = a0;
    while (g(lo) >= 0.0) lo *= 0.5;
    while (g(hi) <= 0.0) hi *= 2.0;
    return safeguarded_newton(g, dg, lo, hi, a0, 1e-12, "solve_gamma_shape");
}

double iw_dof_statistic(int d, double v) {
    double acc = 0.0;
    const double base = v - d - 1.0;
    for (int j = 1; j <= d; ++j) {
        acc += digamma_minus_log(0.5 * (v - d - j));
        acc += std::log1p((1.0 - j) / base);
    }
    return acc;
}

double solve_iw_dof(int d, double rhs, double logdet_c1) {
    if (d < 1) throw DomainError("solve_iw_dof: dimension must be >= 1");
    const double target = rhs - logdet_c1;
    const double lo = 2.0 * d + 2.0;
    const double hi = 1e6;
    auto g = [d, target](double v) { return iw_dof_statistic(d, v) - target; };
    auto dg = [d](double v) {
        double acc = -d / (v - d - 1.0);
        for (int j = 1; j <= d; ++j) acc += 0.5 * trigamma(0.5 * (v - d - j));
        return acc;
    };
    if (!(g(lo) < 0.0) || !(g(hi) > 0.0)) {
        throw ConvergenceError("solve_iw_dof: no root bracketed in (2d+2, 1e6)");
    }
    // Large-v asymptote: statistic ≈ −d(d+1)/(2(v−d−1)).
    double v0 = d + 1.0 - 0.5 * d * (d + 1) / std::min(target, -1e-12);
    return safeguarded_newton(g, dg, lo, hi, v0, 1e-11, "solve_iw_dof");
}

double integrate_adaptive(const std::function<double(double)>& f,
                          std::span<const double> breakpoints,
                          double rel_tol, int max_intervals) {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto rule = [&](double a, double b) {
        const double half = 0.5 * (b - a);
        const double center = 0.5 * (a + b);
        const double fc = f(center);
        double kronrod = wgk[7] * fc;
        double gauss = wg[3] * fc;
        for (int i = 0; i < 7; ++i) {
            const double dx = half * xgk[i];
            const double pair = f(center - dx) + f(center + dx);
            kronrod += wgk[i] * pair;
            if (i % 2 == 1) gauss += wg[i / 2] * pair;
        }
        return Panel{a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
    };

    std::priority_queue<Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        Panel p = rule(breakpoints[i], breakpoints[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    while (!heap.empty() && total_err > rel_tol * std::abs(total) && count < max_intervals) {
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = rule(worst.a, mid);
        const Panel right = rule(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    return total;
}

} // namespace etpmb
