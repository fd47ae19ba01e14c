#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hmix/spectral.hpp"
#include "hmix/symfun.hpp"

namespace hmix::mixop {

/// Normalized coefficients of the mixed quotient operator
///   G(lambda) = sigma_k/sigma_{k-1} - sum_{l=0}^{k-2} beta_l sigma_l/sigma_{k-1}.
/// k = 1 is the degenerate linear case G = sigma_1 (no beta_l terms).
struct Coefficients {
    int n = 0;
    int k = 0;
    Eigen::VectorXd beta_l; // size k-1, all > 0
    double beta = 0.0;      // right-hand side, sign-free

    [[nodiscard]] static Coefficients make(int n, int k, Eigen::VectorXd beta_l, double beta) {
        if (k < 1 || k > n) {
            throw std::invalid_argument("Coefficients: need 1 <= k <= n, got k=" +
                                        std::to_string(k) + ", n=" + std::to_string(n));
        }
        if (beta_l.size() != k - 1) {
            throw std::invalid_argument("Coefficients: expected " + std::to_string(k - 1) +
                                        " beta_l values, got " + std::to_string(beta_l.size()));
        }
        for (int l = 0; l < k - 1; ++l) {
            if (!(beta_l(l) > 0.0)) {
                throw std::domain_error("Coefficients: beta_" + std::to_string(l) +
                                        " must be positive");
            }
        }
        Coefficients c;
        c.n = n;
        c.k = k;
        c.beta_l = std::move(beta_l);
        c.beta = beta;
        return c;
    }
};

/// Converts raw coefficients alpha_0..alpha_{k-1} of the form
///   sigma_k = sum_l alpha_l sigma_l * (binomial weights)
/// into the quotient normalization: beta_l = (C(n,k)/C(n,l)) alpha_l for
/// l <= k-2 and beta = (C(n,k)/C(n,k-1)) alpha_{k-1}.
[[nodiscard]] inline Coefficients normalize_coefficients(const Eigen::VectorXd& alpha, int n, int k) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("normalize_coefficients: need 1 <= k <= n");
    }
    if (alpha.size() != k) {
        throw std::invalid_argument("normalize_coefficients: expected " + std::to_string(k) +
                                    " alpha values, got " + std::to_string(alpha.size()));
    }
    const double cnk = binomial(n, k);
    Eigen::VectorXd beta_l(k - 1);
    for (int l = 0; l <= k - 2; ++l) {
        if (!(alpha(l) > 0.0)) {
            throw std::domain_error("normalize_coefficients: alpha_" + std::to_string(l) +
                                    " must be positive");
        }
        beta_l(l) = cnk / binomial(n, l) * alpha(l);
    }
    const double beta = cnk / binomial(n, k - 1) * alpha(k - 1);
    return Coefficients::make(n, k, std::move(beta_l), beta);
}

namespace detail {

inline void require_cone(const Eigen::VectorXd& lambda, int k) {
    if (!symfun::in_cone(lambda, k - 1)) {
        throw std::domain_error("mixed operator: eigenvalues left Gamma_" +
                                std::to_string(k - 1));
    }
}

[[nodiscard]] inline double value_from_sigmas(const Eigen::VectorXd& e, const Coefficients& c) {
    double g = e(c.k) / e(c.k - 1);
    for (int l = 0; l <= c.k - 2; ++l) {
        g -= c.beta_l(l) * e(l) / e(c.k - 1);
    }
    return g;
}

} // namespace detail

/// G from precomputed sigma_0..sigma_n of an already-validated admissible
/// lambda; the hot path for per-grid-point evaluation.
[[nodiscard]] inline double evaluate_sigmas(const Eigen::VectorXd& sigmas, const Coefficients& c) {
    return detail::value_from_sigmas(sigmas, c);
}

/// G(lambda). Requires lambda in Gamma_{k-1}; throws a domain error instead
/// of evaluating silently outside the cone.
[[nodiscard]] inline double evaluate(const Eigen::VectorXd& lambda, const Coefficients& c) {
    if (lambda.size() != c.n) {
        throw std::invalid_argument("evaluate: dimension mismatch");
    }
    detail::require_cone(lambda, c.k);
    return detail::value_from_sigmas(symfun::sigma_all(lambda), c);
}

/// dG/dlambda_i by the quotient rule through excluded symmetric functions:
///   d(sigma_a/sigma_b)/dlambda_i
///     = (sigma_{a-1}(l|i) sigma_b - sigma_a sigma_{b-1}(l|i)) / sigma_b^2,
/// with sigma_{-1} == 0. Strictly positive on Gamma_{k-1} (ellipticity).
[[nodiscard]] inline Eigen::VectorXd lambda_gradient(const Eigen::VectorXd& lambda,
                                                     const Coefficients& c) {
    if (lambda.size() != c.n) {
        throw std::invalid_argument("lambda_gradient: dimension mismatch");
    }
    detail::require_cone(lambda, c.k);
    const int n = c.n;
    const int k = c.k;
    const Eigen::VectorXd e = symfun::sigma_all(lambda);
    const double sk1 = e(k - 1);
    const double sk1_sq = sk1 * sk1;

    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) {
        const double ex_k1 = symfun::sigma_excl(k - 1, lambda, i);
        const double ex_k2 = (k >= 2) ? symfun::sigma_excl(k - 2, lambda, i) : 0.0;
        double fi = (ex_k1 * sk1 - e(k) * ex_k2) / sk1_sq;
        for (int l = 0; l <= k - 2; ++l) {
            const double ex_l1 = (l >= 1) ? symfun::sigma_excl(l - 1, lambda, i) : 0.0;
            fi -= c.beta_l(l) * (ex_l1 * sk1 - e(l) * ex_k2) / sk1_sq;
        }
        f(i) = fi;
    }
    return f;
}

/// Full pointwise evaluation: value, eigenvalue gradient, matrix gradient
/// dG/dA (positive definite Hermitian on the cone) and the quotient values
/// sigma_l/sigma_{k-1} for l = 0..k.
struct OperatorEval {
    double value = 0.0;
    Eigen::VectorXd grad_lambda;          // ordered like the ascending spectrum
    spectral::HermitianMatrix grad_matrix;
    Eigen::VectorXd quotients;            // length k+1
};

[[nodiscard]] inline OperatorEval evaluate_full(const spectral::HermitianMatrix& a,
                                                const Coefficients& c) {
    if (a.dim() != c.n) {
        throw std::invalid_argument("evaluate_full: dimension mismatch");
    }
    const spectral::EigenPair e = spectral::eig_hermitian(a);
    detail::require_cone(e.lambda.values, c.k);

    OperatorEval out;
    out.value = detail::value_from_sigmas(e.lambda.sigmas, c);
    out.grad_lambda = lambda_gradient(e.lambda.values, c);
    for (int i = 0; i < c.n; ++i) {
        if (!(out.grad_lambda(i) > 0.0)) {
            throw std::domain_error("evaluate_full: ellipticity lost (f_" + std::to_string(i) +
                                    " <= 0)");
        }
    }
    out.grad_matrix = spectral::matrix_gradient(out.grad_lambda, e);
    out.quotients.resize(c.k + 1);
    for (int l = 0; l <= c.k; ++l) {
        out.quotients(l) = e.lambda.sigmas(l) / e.lambda.sigmas(c.k - 1);
    }
    return out;
}

/// Support-plane inequality implied by concavity plus the Euler identity:
///   sum_i f_i(lambda) mu_i
///     >= G(mu) + sum_{l<=k-2} (k-l) beta_l sigma_l(lambda)/sigma_{k-1}(lambda),
/// checked to 1e-10 relative tolerance. Both arguments must be admissible.
[[nodiscard]] inline bool concavity_inequality_check(const Eigen::VectorXd& lambda,
                                                     const Eigen::VectorXd& mu,
                                                     const Coefficients& c) {
    detail::require_cone(lambda, c.k);
    detail::require_cone(mu, c.k);
    const Eigen::VectorXd f = lambda_gradient(lambda, c);
    const double lhs = f.dot(mu);
    const Eigen::VectorXd e = symfun::sigma_all(lambda);
    double rhs = evaluate(mu, c);
    for (int l = 0; l <= c.k - 2; ++l) {
        rhs += static_cast<double>(c.k - l) * c.beta_l(l) * e(l) / e(c.k - 1);
    }
    const double tol = 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return lhs >= rhs - tol;
}

/// Pointwise structural checks for an admissible lambda solving
/// G(lambda) = beta: positivity/boundedness of the quotients, the lower bound
/// on the top quotient, the trace lower bound (n-k+1)/k and the Euler
/// identity. The constants in the upper bounds are not explicit, so the
/// report records the observed quotient values and only guards against
/// blow-up (finite and below 1e12).
struct ConeBoundsReport {
    bool admissible = false;
    Eigen::VectorXd quotients;     // sigma_l/sigma_{k-1}, l = 0..k
    bool quotients_positive = false; // l <= k-2 finite, positive, below guard
    bool top_quotient_ok = false;    // sigma_k/sigma_{k-1} > -|beta| and below guard
    double trace_sum = 0.0;          // sum_i G^{ii}
    double trace_lower_bound = 0.0;  // (n-k+1)/k
    bool trace_ok = false;
    double euler_lhs = 0.0;          // sum_i G^{ii} lambda_i
    double euler_rhs = 0.0;          // beta + sum (k-l) beta_l sigma_l/sigma_{k-1}
    bool euler_ok = false;
    bool ok = false;
};

[[nodiscard]] inline ConeBoundsReport cone_bounds_report(const Eigen::VectorXd& lambda,
                                                         const Coefficients& c) {
    constexpr double kGuard = 1e12;
    ConeBoundsReport r;
    r.trace_lower_bound = static_cast<double>(c.n - c.k + 1) / static_cast<double>(c.k);
    if (!symfun::in_cone(lambda, c.k - 1)) {
        // division guard: report failure instead of evaluating outside the cone
        r.quotients = Eigen::VectorXd::Constant(c.k + 1,
                                                std::numeric_limits<double>::infinity());
        return r;
    }
    r.admissible = true;

    const Eigen::VectorXd e = symfun::sigma_all(lambda);
    const double value = detail::value_from_sigmas(e, c);
    if (std::abs(value - c.beta) > 1e-8 * std::max(1.0, std::abs(c.beta))) {
        throw std::invalid_argument("cone_bounds_report: G(lambda) does not match beta "
                                    "(residual " + std::to_string(value - c.beta) + ")");
    }

    r.quotients.resize(c.k + 1);
    for (int l = 0; l <= c.k; ++l) r.quotients(l) = e(l) / e(c.k - 1);

    r.quotients_positive = true;
    for (int l = 0; l <= c.k - 2; ++l) {
        const double q = r.quotients(l);
        if (!(q > 0.0) || !std::isfinite(q) || q >= kGuard) r.quotients_positive = false;
    }
    const double top = r.quotients(c.k);
    r.top_quotient_ok = std::isfinite(top) && top > -std::abs(c.beta) && top < kGuard;

    const Eigen::VectorXd f = lambda_gradient(lambda, c);
    r.trace_sum = f.sum();
    r.trace_ok = r.trace_sum >= r.trace_lower_bound - 1e-12 * std::max(1.0, r.trace_sum);

    r.euler_lhs = f.dot(lambda);
    r.euler_rhs = c.beta;
    for (int l = 0; l <= c.k - 2; ++l) {
        r.euler_rhs += static_cast<double>(c.k - l) * c.beta_l(l) * r.quotients(l);
    }
    r.euler_ok = std::abs(r.euler_lhs - r.euler_rhs) <=
                 1e-10 * std::max({1.0, std::abs(r.euler_lhs), std::abs(r.euler_rhs)});

    r.ok = r.quotients_positive && r.top_quotient_ok && r.trace_ok && r.euler_ok;
    return r;
}

/// Which branch of the large-eigenvalue dichotomy holds at a point, for
/// empirically calibrated constants (theta, N). Diagnostic only.
enum class DichotomyBranch { FirstBranch, SecondBranch, NeitherHolds, NotApplicable };

/// Requires mu to satisfy the strict restricted-quotient inequality
///   sigma_{k-1}(mu|i)/sigma_{k-2}(mu|i)
///     - sum_{l=1}^{k-2} beta_l sigma_{l-1}(mu|i)/sigma_{k-2}(mu|i) > beta
/// for every i, and lambda to solve G(lambda) = beta to 1e-8. When
/// max lambda_i >= N, reports which of
///   (a) sum f_i(mu_i - lambda_i) >= theta (1 + sum f_i)
///   (b) f_max lambda_max >= theta
/// holds.
[[nodiscard]] inline DichotomyBranch subsolution_dichotomy_check(const Eigen::VectorXd& lambda,
                                                                 const Eigen::VectorXd& mu,
                                                                 const Coefficients& c,
                                                                 double theta, double big_n) {
    detail::require_cone(lambda, c.k);
    detail::require_cone(mu, c.k);
    const int k = c.k;
    if (k < 2) {
        throw std::invalid_argument("subsolution_dichotomy_check: requires k >= 2");
    }
    for (int i = 0; i < c.n; ++i) {
        const double d = symfun::sigma_excl(k - 2, mu, i);
        if (!(d > 0.0)) {
            throw std::invalid_argument("subsolution_dichotomy_check: sigma_{k-2}(mu|i) <= 0");
        }
        double lhs = symfun::sigma_excl(k - 1, mu, i) / d;
        for (int l = 1; l <= k - 2; ++l) {
            lhs -= c.beta_l(l) * symfun::sigma_excl(l - 1, mu, i) / d;
        }
        if (!(lhs > c.beta)) {
            throw std::invalid_argument("subsolution_dichotomy_check: strict subsolution "
                                        "inequality fails at component " + std::to_string(i));
        }
    }
    const double value = evaluate(lambda, c);
    if (std::abs(value - c.beta) > 1e-8 * std::max(1.0, std::abs(c.beta))) {
        throw std::invalid_argument("subsolution_dichotomy_check: lambda does not solve "
                                    "G(lambda) = beta");
    }

    int imax = 0;
    lambda.maxCoeff(&imax);
    const double lambda_max = lambda(imax);
    if (lambda_max < big_n) return DichotomyBranch::NotApplicable;

    const Eigen::VectorXd f = lambda_gradient(lambda, c);
    if (f.dot(mu - lambda) >= theta + theta * f.sum()) return DichotomyBranch::FirstBranch;
    if (f(imax) * lambda_max >= theta) return DichotomyBranch::SecondBranch;
    return DichotomyBranch::NeitherHolds;
}

} // namespace hmix::mixop
