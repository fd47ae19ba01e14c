#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hmix/oracle.hpp"
#include "hmix/problems.hpp"
#include "hmix/sampling.hpp"
#include "hmix/solver.hpp"

namespace hmix::suites {

struct SuiteResult {
    std::string name;
    bool passed = false;
    oracle::OracleReport report;
    std::vector<std::string> lines;
    double seconds = 0.0;

    void note(const std::string& s) { lines.push_back(s); }
};

namespace detail {

template <typename Fn>
SuiteResult timed(const std::string& name, Fn&& fn) {
    SuiteResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    fn(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

} // namespace detail

/// Recurrence vs subset-enumeration agreement, the downdate identity,
/// cone nesting and the Newton-MacLaurin inequalities.
[[nodiscard]] inline SuiteResult run_symfun_suite(std::uint64_t seed, int vectors_per_n = 1000) {
    return detail::timed("symfun", [&](SuiteResult& r) {
        sampling::Rng rng(seed);
        r.passed = true;

        // production recurrence against the enumeration oracle
        for (int n = 2; n <= 8; ++n) {
            for (int c = 0; c < vectors_per_n; ++c) {
                const Eigen::VectorXd v = sampling::random_vector(rng, n, -2.0, 2.0);
                const Eigen::VectorXd e = symfun::sigma_all(v);
                for (int k = 0; k <= n; ++k) {
                    const double ref = oracle::sigma_bruteforce(k, v);
                    const double abs_err = std::abs(e(k) - ref);
                    const double rel = abs_err / std::max(std::abs(ref), 1e-300);
                    r.report.record(abs_err, rel, 1e-12,
                                    "sigma mismatch n=" + std::to_string(n) +
                                        " k=" + std::to_string(k));
                }
            }
        }
        r.note("sigma vs enumeration: max rel err " + detail::fmt(r.report.max_rel_err) + " over " +
               std::to_string(r.report.cases) + " cases");

        // downdate identity sigma_k = sigma_k(l|i) + l_i sigma_{k-1}(l|i)
        double worst_downdate = 0.0;
        for (int n = 2; n <= 8; ++n) {
            for (int c = 0; c < 200; ++c) {
                const Eigen::VectorXd v = sampling::random_vector(rng, n, -2.0, 2.0);
                const Eigen::VectorXd e = symfun::sigma_all(v);
                for (int k = 1; k <= n - 1; ++k) {
                    for (int i = 0; i < n; ++i) {
                        const double lhs = e(k);
                        const double rhs = symfun::sigma_excl(k, v, i) +
                                           v(i) * symfun::sigma_excl(k - 1, v, i);
                        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
                        worst_downdate = std::max(worst_downdate, std::abs(lhs - rhs) / scale);
                    }
                }
            }
        }
        if (worst_downdate > 1e-12) {
            r.passed = false;
            r.note("downdate identity FAILED: " + detail::fmt(worst_downdate));
        } else {
            r.note("downdate identity: worst rel err " + detail::fmt(worst_downdate));
        }

        // cone nesting
        for (int c = 0; c < 500; ++c) {
            const int n = rng.uniform_int(2, 6);
            const Eigen::VectorXd v = sampling::random_vector(rng, n, -1.0, 3.0);
            const symfun::ConeReport cr = symfun::cone_membership(v);
            for (int m = 1; m <= cr.max_k; ++m) {
                if (!symfun::in_cone(v, m)) {
                    r.passed = false;
                    r.note("cone nesting FAILED at m=" + std::to_string(m));
                }
            }
        }
        r.note("cone nesting: ok");

        if (!r.report.ok()) r.passed = false;
    });
}

/// Enumerates the admissible Newton-MacLaurin index tuples for each n and
/// verifies the inequality on random cone samples.
[[nodiscard]] inline SuiteResult run_newton_maclaurin_suite(std::uint64_t seed,
                                                            int samples_per_tuple = 1000,
                                                            int n_max = 6) {
    return detail::timed("newton_maclaurin", [&](SuiteResult& r) {
        r.passed = true;
        long tuples = 0, checks = 0;
        double worst_slack = 0.0;
        for (int n = 2; n <= n_max; ++n) {
            sampling::Rng rng(seed + static_cast<std::uint64_t>(n));
            for (int k = 1; k <= n; ++k) {
                std::vector<Eigen::VectorXd> pool;
                pool.reserve(samples_per_tuple);
                for (int c = 0; c < samples_per_tuple; ++c) {
                    pool.push_back(sampling::random_cone_vector(rng, n, k, 1e-6));
                }
                for (int l = 0; l < k; ++l) {
                    for (int rr = 1; rr <= k; ++rr) {
                        for (int s = 0; s <= std::min(l, rr - 1); ++s) {
                            ++tuples;
                            for (const Eigen::VectorXd& v : pool) {
                                const auto nm = symfun::newton_maclaurin(v, k, l, rr, s);
                                worst_slack =
                                    std::max(worst_slack, (nm.lhs - nm.rhs) /
                                                              std::max(1.0, std::abs(nm.rhs)));
                                ++checks;
                                if (!nm.holds) {
                                    r.passed = false;
                                    r.note("NM FAILED n=" + std::to_string(n) + " (k,l,r,s)=(" +
                                           std::to_string(k) + "," + std::to_string(l) + "," +
                                           std::to_string(rr) + "," + std::to_string(s) + ")");
                                }
                            }
                        }
                    }
                }
            }
        }
        r.report.cases = checks;
        r.note(std::to_string(tuples) + " index tuples, " + std::to_string(checks) +
               " checks, worst relative slack " + detail::fmt(worst_slack));
    });
}

/// Eigen-decomposition quality, analytic vs finite-difference matrix
/// gradients, gradient monotonicity for the concave operator, interlacing.
[[nodiscard]] inline SuiteResult run_spectral_suite(std::uint64_t seed, int fd_samples = 500,
                                                    int interlacing_samples = 1000) {
    return detail::timed("spectral", [&](SuiteResult& r) {
        sampling::Rng rng(seed);
        r.passed = true;

        double worst_recon = 0.0, worst_unit = 0.0;
        for (int c = 0; c < 1000; ++c) {
            const int n = rng.uniform_int(2, 6);
            const auto a = sampling::random_hermitian(rng, n);
            const auto e = spectral::eig_hermitian(a);
            const double recon = (e.basis * e.lambda.values.asDiagonal() * e.basis.adjoint() -
                                  a.matrix())
                                     .norm() /
                                 std::max(a.norm(), 1e-300);
            const double unit =
                (e.basis.adjoint() * e.basis - Eigen::MatrixXcd::Identity(n, n)).norm();
            worst_recon = std::max(worst_recon, recon);
            worst_unit = std::max(worst_unit, unit);
        }
        if (worst_recon > 1e-10 || worst_unit > 1e-12) r.passed = false;
        r.note("eig reconstruction " + detail::fmt(worst_recon) + ", unitarity " +
               detail::fmt(worst_unit));

        // analytic gradient vs finite differences on gap-protected matrices
        double worst_grad = 0.0;
        for (int c = 0; c < fd_samples; ++c) {
            const int n = rng.uniform_int(2, 5);
            const int k = rng.uniform_int(2, n);
            const auto a = sampling::random_admissible_matrix(rng, n, k, 1e-3, 1e-2);
            auto coef = sampling::random_coefficients(rng, n, k);
            const auto full = mixop::evaluate_full(a, coef);
            const auto fd = oracle::fd_matrix_gradient(coef, a, 1e-5);
            const double rel = (full.grad_matrix.matrix() - fd.matrix()).norm() /
                               std::max(full.grad_matrix.norm(), 1e-300);
            worst_grad = std::max(worst_grad, rel);
            r.report.record((full.grad_matrix.matrix() - fd.matrix()).norm(), rel, 1e-6,
                            "matrix gradient mismatch");
        }
        r.note("matrix gradient vs FD: worst rel err " + detail::fmt(worst_grad));

        // concavity orders the gradient against the spectrum
        for (int c = 0; c < 500; ++c) {
            const int n = rng.uniform_int(2, 5);
            const int k = rng.uniform_int(2, n);
            Eigen::VectorXd v = sampling::random_cone_vector(rng, n, k - 1 > 0 ? k - 1 : 1);
            std::sort(v.data(), v.data() + n);
            auto coef = sampling::random_coefficients(rng, n, k);
            if (!symfun::in_cone(v, k - 1)) continue;
            const Eigen::VectorXd f = mixop::lambda_gradient(v, coef);
            for (int i = 0; i + 1 < n; ++i) {
                if (f(i) < f(i + 1) - 1e-10 * std::max(1.0, std::abs(f(i)))) {
                    r.passed = false;
                    r.note("gradient ordering FAILED");
                }
            }
        }
        r.note("gradient ordering vs ascending spectrum: ok");

        long bad = 0;
        for (int c = 0; c < interlacing_samples; ++c) {
            const int n = rng.uniform_int(2, 6);
            if (!spectral::interlacing_check(sampling::random_hermitian(rng, n))) ++bad;
        }
        if (bad > 0) {
            r.passed = false;
            r.note("interlacing FAILED on " + std::to_string(bad) + " samples");
        } else {
            r.note("interlacing: 0 violations in " + std::to_string(interlacing_samples));
        }
        if (!r.report.ok()) r.passed = false;
    });
}

/// Ellipticity, midpoint concavity, Euler identity and trace bound of the
/// quotient operator on random admissible data.
[[nodiscard]] inline SuiteResult run_operator_suite(std::uint64_t seed, int samples = 1000) {
    return detail::timed("operator", [&](SuiteResult& r) {
        r.passed = true;
        const std::vector<std::pair<int, int>> nk = {{2, 2}, {3, 2}, {3, 3}, {4, 3}};
        double worst_concavity = 0.0, worst_euler = 0.0, worst_trace = 0.0;
        long elliptic_bad = 0;
        for (const auto& [n, k] : nk) {
            sampling::Rng rng(seed + static_cast<std::uint64_t>(97 * n + k));
            for (int c = 0; c < samples; ++c) {
                auto coef = sampling::random_coefficients(rng, n, k);
                const Eigen::VectorXd a = sampling::random_cone_vector(rng, n, k - 1, 1e-3);
                const Eigen::VectorXd b = sampling::random_cone_vector(rng, n, k - 1, 1e-3);

                // ellipticity
                const Eigen::VectorXd fa = mixop::lambda_gradient(a, coef);
                if (!(fa.minCoeff() > 0.0)) ++elliptic_bad;

                // midpoint concavity
                const Eigen::VectorXd mid = 0.5 * (a + b);
                const double fm = mixop::evaluate(mid, coef);
                const double avg =
                    0.5 * (mixop::evaluate(a, coef) + mixop::evaluate(b, coef));
                const double scale = std::max({1.0, std::abs(fm), std::abs(avg)});
                worst_concavity = std::max(worst_concavity, (avg - fm) / scale);

                // Euler identity with beta defined as the operator value
                const Eigen::VectorXd e = symfun::sigma_all(a);
                double euler_rhs = mixop::evaluate(a, coef);
                for (int l = 0; l <= k - 2; ++l) {
                    euler_rhs += (k - l) * coef.beta_l(l) * e(l) / e(k - 1);
                }
                const double euler_lhs = fa.dot(a);
                worst_euler = std::max(worst_euler,
                                       std::abs(euler_lhs - euler_rhs) /
                                           std::max({1.0, std::abs(euler_lhs), std::abs(euler_rhs)}));

                // trace lower bound
                const double bound = static_cast<double>(n - k + 1) / k;
                worst_trace = std::max(worst_trace, bound - fa.sum());

                r.report.cases++;
            }
        }
        if (elliptic_bad > 0) {
            r.passed = false;
            r.note("ellipticity FAILED on " + std::to_string(elliptic_bad) + " samples");
        } else {
            r.note("ellipticity: all gradients positive");
        }
        if (worst_concavity > 1e-12) {
            r.passed = false;
            r.note("midpoint concavity FAILED: " + detail::fmt(worst_concavity));
        } else {
            r.note("midpoint concavity: worst violation " + detail::fmt(worst_concavity));
        }
        if (worst_euler > 1e-10) {
            r.passed = false;
            r.note("Euler identity FAILED: " + detail::fmt(worst_euler));
        } else {
            r.note("Euler identity: worst rel err " + detail::fmt(worst_euler));
        }
        if (worst_trace > 1e-12) {
            r.passed = false;
            r.note("trace lower bound FAILED by " + detail::fmt(worst_trace));
        } else {
            r.note("trace lower bound: satisfied with margin");
        }
        r.report.max_rel_err = std::max({worst_concavity, worst_euler});
    });
}

// ---------------------------------------------------------------------------
// reference problems shared by the convergence suite, the acceptance tests
// and the CI configs
// ---------------------------------------------------------------------------

/// n=2, k=2 on [0,1]^4 with chi0 = 0, alpha_0 = 0.5 (beta_0 = 0.5).
struct ReferenceProblem {
    problems::ManufacturedProblem manufactured;
    problems::ProblemSpec spec; // deflated when c > 0
};

[[nodiscard]] inline ReferenceProblem make_reference_problem(int points_per_axis,
                                                             bool quartic_term,
                                                             double deflation_c) {
    const int n = 2, k = 2;
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(4);
    const geom::GridSpec grid = geom::GridSpec::make(
        n, lo, hi, {points_per_axis, points_per_axis, points_per_axis, points_per_axis});
    const geom::HermitianField chi0 = geom::HermitianField::constant(
        grid, spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(n, n)));
    std::vector<Eigen::VectorXd> beta_low{
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.interior_points()), 0.5)};
    analytic::AnalyticFunction ustar = analytic::AnalyticFunction::norm_sq(1.0);
    if (quartic_term) ustar = ustar.plus(analytic::AnalyticFunction::quartic_abs(0.1, 0));

    ReferenceProblem rp{problems::manufacture(grid, k, chi0, beta_low, ustar), {}};
    if (deflation_c > 0.0) {
        rp.spec = problems::deflate_subsolution(
            rp.manufactured, deflation_c, analytic::AnalyticFunction::sin_bump(1.0, lo, hi));
    } else {
        rp.spec = rp.manufactured.spec;
    }
    return rp;
}

/// Manufactured-solution refinement study: solves the quartic problem on a
/// sequence of grids and reports the observed order of the sup-norm error.
struct ConvergenceResult {
    std::vector<int> grids;
    std::vector<double> errors;
    std::vector<double> pairwise_orders;
    double ls_order = 0.0; // least-squares slope of log(err) vs log(h)
};

[[nodiscard]] inline ConvergenceResult convergence_study(const std::vector<int>& grids,
                                                         double deflation_c,
                                                         const solver::SolverConfig& cfg = {}) {
    ConvergenceResult out;
    out.grids = grids;
    for (int pts : grids) {
        const ReferenceProblem rp = make_reference_problem(pts, true, deflation_c);
        auto [u, rep] = solver::continuity_solve(rp.spec, cfg);
        if (rep.status != solver::SolveStatus::Converged) {
            throw std::runtime_error("convergence_study: solve failed on " + std::to_string(pts) +
                                     "^4 grid: " + rep.failure_detail);
        }
        out.errors.push_back(u.max_abs_diff(rp.manufactured.ustar));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(grids.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(1.0 / (grids[i] - 1));
        const double y = std::log(out.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        if (i > 0) {
            const double h_ratio = static_cast<double>(grids[i - 1] - 1) / (grids[i] - 1);
            out.pairwise_orders.push_back(std::log(out.errors[i - 1] / out.errors[i]) /
                                          std::log(1.0 / h_ratio));
        }
    }
    out.ls_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

[[nodiscard]] inline SuiteResult run_convergence_suite(std::uint64_t /*seed*/,
                                                       std::vector<int> grids = {9, 13, 17},
                                                       double deflation_c = 0.01) {
    return detail::timed("convergence", [&](SuiteResult& r) {
        const ConvergenceResult cr = convergence_study(grids, deflation_c);
        for (std::size_t i = 0; i < cr.grids.size(); ++i) {
            r.note("grid " + std::to_string(cr.grids[i]) + "^4: sup error " +
                   detail::fmt(cr.errors[i]));
        }
        std::string orders;
        for (double p : cr.pairwise_orders) orders += (orders.empty() ? "" : ", ") + detail::fmt(p);
        r.note("pairwise orders: " + orders);
        r.note("least-squares order: " + detail::fmt(cr.ls_order));
        r.passed = cr.ls_order >= 1.8 && cr.ls_order <= 2.2;
        r.report.cases = static_cast<long>(cr.grids.size());
        r.report.max_rel_err = std::abs(cr.ls_order - 2.0);
    });
}

} // namespace hmix::suites
