#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmix/geometry.hpp"
#include "hmix/operator.hpp"
#include "hmix/problems.hpp"
#include "hmix/spectral.hpp"

namespace hmix::oracle {

/// Aggregate result of an oracle-vs-production comparison run.
struct OracleReport {
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    long cases = 0;
    std::vector<std::string> failures;

    void record(double abs_err, double rel_err, double tol_rel, const std::string& what) {
        ++cases;
        max_abs_err = std::max(max_abs_err, abs_err);
        max_rel_err = std::max(max_rel_err, rel_err);
        if (rel_err > tol_rel) failures.push_back(what);
    }

    [[nodiscard]] bool ok() const { return failures.empty(); }
};

/// sigma_k by explicit subset enumeration. Reference only; exponential in n.
[[nodiscard]] inline double sigma_bruteforce(int k, const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    if (n > 12) {
        throw std::invalid_argument("sigma_bruteforce: n > 12 not supported");
    }
    if (k < 0 || k > n) {
        throw std::invalid_argument("sigma_bruteforce: k out of range");
    }
    if (k == 0) return 1.0;
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) prod *= lambda(i);
        }
        total += prod;
    }
    return total;
}

/// Central finite differences of G(lambda(A + t E)) along each of the n^2
/// real Hermitian coordinate directions E. Validates the analytic matrix
/// gradient. Requires eigenvalue gaps and an admissibility margin large
/// relative to the step.
[[nodiscard]] inline spectral::HermitianMatrix fd_matrix_gradient(const mixop::Coefficients& c,
                                                                  const spectral::HermitianMatrix& a,
                                                                  double step) {
    const int n = a.dim();
    const auto value_at = [&](const Eigen::MatrixXcd& m) {
        const spectral::EigenPair e = spectral::eig_hermitian(spectral::HermitianMatrix::symmetrized(m));
        return mixop::evaluate(e.lambda.values, c);
    };

    Eigen::MatrixXcd grad = Eigen::MatrixXcd::Zero(n, n);
    const Eigen::MatrixXcd& base = a.matrix();
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (i == j) {
                Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
                e(i, i) = 1.0;
                const double d = (value_at(base + step * e) - value_at(base - step * e)) /
                                 (2.0 * step);
                grad(i, i) = d;
            } else {
                Eigen::MatrixXcd er = Eigen::MatrixXcd::Zero(n, n);
                er(i, j) = 1.0;
                er(j, i) = 1.0;
                const double dre = (value_at(base + step * er) - value_at(base - step * er)) /
                                   (2.0 * step);
                Eigen::MatrixXcd ei = Eigen::MatrixXcd::Zero(n, n);
                ei(i, j) = std::complex<double>(0.0, 1.0);
                ei(j, i) = std::complex<double>(0.0, -1.0);
                const double dim = (value_at(base + step * ei) - value_at(base - step * ei)) /
                                   (2.0 * step);
                // directional derivatives along the basis pair give twice the
                // real/imaginary parts of the gradient entry
                grad(i, j) = std::complex<double>(0.5 * dre, 0.5 * dim);
                grad(j, i) = std::conj(grad(i, j));
            }
        }
    }
    return spectral::HermitianMatrix::symmetrized(grad);
}

/// Independent nonlinear solve of the t = 1 equation on a small grid: dense
/// Newton with a finite-difference Jacobian over the interior unknowns. Uses
/// the same stencils through the residual map but none of the production
/// Jacobian assembly. Intended for problems with at most ~1000 unknowns.
[[nodiscard]] inline geom::GridFunction tiny_solve_bruteforce(const problems::ProblemSpec& spec,
                                                              int max_iters = 500,
                                                              double tol = 1e-10) {
    const geom::GridSpec& g = spec.grid;
    const std::size_t m = g.interior_points();
    if (m > 1000) {
        throw std::invalid_argument("tiny_solve_bruteforce: grid too large (" +
                                    std::to_string(m) + " interior unknowns)");
    }

    // interior flat index <-> full grid flat index
    std::vector<std::size_t> full_of(m);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        full_of[ii] = g.flat(mi);
    });

    geom::GridFunction u = spec.usub;
    const Eigen::VectorXd beta = spec.beta_field();

    const auto try_residual = [&](const geom::GridFunction& w) -> std::optional<Eigen::VectorXd> {
        const geom::HermitianField chi = geom::chi_u(w, spec.chi0);
        Eigen::VectorXd r(static_cast<Eigen::Index>(m));
        bool ok = true;
        g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
            if (!ok) return;
            const spectral::EigenPair e = spectral::eig_hermitian(chi.at(ii));
            if (!symfun::in_cone(e.lambda.values, spec.k - 1)) {
                ok = false;
                return;
            }
            r(static_cast<Eigen::Index>(ii)) =
                mixop::evaluate_sigmas(e.lambda.sigmas, spec.coef(ii)) -
                beta(static_cast<Eigen::Index>(ii));
        });
        if (!ok) return std::nullopt;
        return r;
    };

    auto res = try_residual(u);
    if (!res) {
        throw std::domain_error("tiny_solve_bruteforce: start iterate inadmissible");
    }

    for (int iter = 0; iter < max_iters; ++iter) {
        const double rn = res->cwiseAbs().maxCoeff();
        if (rn <= tol) return u;

        // finite-difference Jacobian, column by column
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        const double fd = 1e-7;
        for (std::size_t j = 0; j < m; ++j) {
            geom::GridFunction up = u;
            up.values[full_of[j]] += fd;
            const auto rp = try_residual(up);
            if (!rp) {
                throw std::domain_error("tiny_solve_bruteforce: admissibility lost while "
                                        "differencing");
            }
            jac.col(static_cast<Eigen::Index>(j)) = (*rp - *res) / fd;
        }

        const Eigen::VectorXd delta = jac.partialPivLu().solve(-*res);
        bool moved = false;
        for (double s = 1.0; s >= 1e-8; s *= 0.5) {
            geom::GridFunction cand = u;
            for (std::size_t j = 0; j < m; ++j) {
                cand.values[full_of[j]] += s * delta(static_cast<Eigen::Index>(j));
            }
            const auto rc = try_residual(cand);
            if (!rc) continue;
            if (rc->cwiseAbs().maxCoeff() < rn) {
                u = std::move(cand);
                res = rc;
                moved = true;
                break;
            }
        }
        if (!moved) {
            throw std::runtime_error("tiny_solve_bruteforce: line search stalled at residual " +
                                     std::to_string(rn));
        }
    }
    throw std::runtime_error("tiny_solve_bruteforce: no convergence within iteration budget");
}

} // namespace hmix::oracle
