#include <catch2/catch_amalgamated.hpp>

#include "hmix/oracle.hpp"
#include "hmix/sampling.hpp"
#include "hmix/solver.hpp"
#include "hmix/suites.hpp"

using namespace hmix;
using Catch::Approx;

TEST_CASE("sigma_bruteforce closed forms", "[oracle]") {
    Eigen::VectorXd l(4);
    l << 0.5, -1.5, 2.0, 3.0;
    CHECK(oracle::sigma_bruteforce(1, l) == Approx(l.sum()));
    CHECK(oracle::sigma_bruteforce(4, l) == Approx(l.prod()));
    CHECK(oracle::sigma_bruteforce(0, l) == 1.0);

    Eigen::VectorXd s(3);
    s << 1, 2, 3; // hand expansion: 1*2 + 1*3 + 2*3
    CHECK(oracle::sigma_bruteforce(2, s) == Approx(11.0));

    CHECK_THROWS_AS(oracle::sigma_bruteforce(1, Eigen::VectorXd::Ones(13)),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle::sigma_bruteforce(5, s), std::invalid_argument);
}

TEST_CASE("fd_matrix_gradient reference values", "[oracle]") {
    // identity, n=3, k=2, beta_0=1: analytic value (4/9) I
    const auto c = mixop::Coefficients::make(3, 2, Eigen::VectorXd::Constant(1, 1.0), 0.0);
    const auto fd = oracle::fd_matrix_gradient(c, spectral::HermitianMatrix::identity(3), 1e-5);
    CHECK((fd.matrix() - (4.0 / 9.0) * Eigen::MatrixXcd::Identity(3, 3)).norm() <= 1e-7);

    // diagonal input: diagonal result equal to the eigenvalue gradient
    const auto d = spectral::HermitianMatrix::real_diagonal(Eigen::Vector3d(0.7, 1.1, 2.0));
    const auto fdd = oracle::fd_matrix_gradient(c, d, 1e-5);
    Eigen::VectorXd lam(3);
    lam << 0.7, 1.1, 2.0;
    const Eigen::VectorXd f = mixop::lambda_gradient(lam, c);
    for (int i = 0; i < 3; ++i) CHECK(fdd.matrix()(i, i).real() == Approx(f(i)).margin(1e-7));
}

TEST_CASE("tiny dense solve recovers the quadratic manufactured solution", "[oracle]") {
    const auto rp = suites::make_reference_problem(5, false, 0.0);
    const geom::GridFunction u = oracle::tiny_solve_bruteforce(rp.spec);
    CHECK(u.max_abs_diff(rp.manufactured.ustar) <= 1e-9);
}

TEST_CASE("tiny dense solve agrees with the continuity method", "[oracle]") {
    // independent path to the same discrete solution on the 7^4 problem
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    const geom::GridFunction u_ref = oracle::tiny_solve_bruteforce(rp.spec);
    auto [u, rep] = solver::continuity_solve(rp.spec);
    REQUIRE(rep.status == solver::SolveStatus::Converged);
    CHECK(u.max_abs_diff(u_ref) <= 1e-7);
}

TEST_CASE("infeasible construction fails identically for both paths", "[oracle]") {
    const auto g = geom::GridSpec::make(2, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4),
                                        {7, 7, 7, 7});
    const auto chi0 = geom::HermitianField::constant(
        g, spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(2, 2)));
    std::vector<Eigen::VectorXd> beta_low{
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.interior_points()), 0.5)};
    const auto mp = problems::manufacture(
        g, 2, chi0, beta_low,
        analytic::AnalyticFunction::norm_sq(1.0).plus(
            analytic::AnalyticFunction::quartic_abs(0.1, 0)));
    const auto bump = analytic::AnalyticFunction::sin_bump(1.0, g.lo, g.hi);
    // over-deflation is rejected at construction, before either solver runs
    CHECK_THROWS_AS(problems::deflate_subsolution(mp, 10.0, bump), construction_error);

    // oversize grids are rejected by the dense oracle
    const auto big = suites::make_reference_problem(9, false, 0.0);
    CHECK_THROWS_AS(oracle::tiny_solve_bruteforce(big.spec), std::invalid_argument);
}
