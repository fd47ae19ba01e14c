#include <catch2/catch_amalgamated.hpp>

#include "hmix/problems.hpp"
#include "hmix/solver.hpp"
#include "hmix/suites.hpp"

using namespace hmix;
using Catch::Approx;

namespace {

geom::GridSpec box_grid(int n, int pts) {
    return geom::GridSpec::make(n, Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd::Ones(2 * n),
                                std::vector<int>(2 * n, pts));
}

geom::HermitianField zero_chi0(const geom::GridSpec& g) {
    return geom::HermitianField::constant(
        g, spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(g.n, g.n)));
}

} // namespace

TEST_CASE("residual at the homotopy start is exactly zero", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    const geom::GridFunction r = solver::residual(rp.spec.usub, rp.spec, 0.0);
    for (double v : r.values) REQUIRE(v == 0.0);
}

TEST_CASE("residual of the equality quadratic problem vanishes at t = 1", "[solver]") {
    // quadratics are exact under the stencils, so b0 == beta and the
    // manufactured solution solves every t
    const auto rp = suites::make_reference_problem(7, false, 0.0);
    const geom::GridFunction r = solver::residual(rp.manufactured.ustar, rp.spec, 1.0);
    double worst = 0.0;
    for (double v : r.values) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-13);
}

TEST_CASE("residual at a strict subsolution is nonnegative at t = 1", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    const geom::GridFunction r = solver::residual(rp.spec.usub, rp.spec, 1.0);
    double lowest = 0.0;
    for (double v : r.values) lowest = std::min(lowest, v);
    CHECK(lowest >= -1e-10);
}

TEST_CASE("residual reports admissibility loss with the violating points", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.0);
    geom::GridFunction bad = rp.spec.usub;
    // a deep negative spike at one interior point destroys the cone there
    std::vector<int> mi{3, 3, 3, 3};
    bad.values[rp.spec.grid.flat(mi)] -= 1.0;
    try {
        (void)solver::residual(bad, rp.spec, 0.0);
        FAIL("expected admissibility_error");
    } catch (const admissibility_error& e) {
        CHECK_FALSE(e.points().empty());
    }
}

TEST_CASE("newton_step is a no-op at a solved state", "[solver]") {
    const auto rp = suites::make_reference_problem(7, false, 0.0);
    solver::HomotopyState state;
    state.u = rp.manufactured.ustar;
    const solver::SolverConfig cfg;
    CHECK(solver::newton_step(state, rp.spec, 1.0, cfg) == solver::StepStatus::Converged);
    CHECK(state.residual_inf <= cfg.newton_tol);
    CHECK(state.u.values == rp.manufactured.ustar.values);
}

TEST_CASE("one Newton step solves the degenerate linear case k = 1", "[solver]") {
    // k = 1: G = sigma_1(chi_u) = trace, affine in u, so a single exact
    // Newton step reaches the linear tolerance from any admissible start
    const auto g = box_grid(2, 7);
    std::vector<Eigen::VectorXd> alpha{
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.interior_points()), 1.25)};
    const auto usub = analytic::AnalyticFunction::norm_sq(1.3).sample(g);
    const auto spec =
        problems::ProblemSpec::create(g, 1, zero_chi0(g), alpha, usub, usub);
    CHECK(spec.coef(0).beta == Approx(2.5)); // n * alpha_0

    solver::HomotopyState state;
    state.u = spec.usub;
    const solver::SolverConfig cfg;
    REQUIRE(solver::newton_step(state, spec, 1.0, cfg) == solver::StepStatus::Accepted);
    CHECK(state.residual_inf <= cfg.newton_tol);
}

TEST_CASE("continuity solve on the equality quadratic problem", "[solver]") {
    const auto rp = suites::make_reference_problem(9, false, 0.0);
    auto [u, rep] = solver::continuity_solve(rp.spec);
    REQUIRE(rep.status == solver::SolveStatus::Converged);
    CHECK(rep.final_residual <= 1e-10);
    CHECK(u.max_abs_diff(rp.manufactured.ustar) <= 1e-9);
    // constant homotopy path: no Newton work needed anywhere
    for (const auto& rec : rep.records) CHECK(rec.newton_iters <= 3);
    CHECK(rep.records.back().t == 1.0);
    CHECK(rep.cone_invariant_ok);
    CHECK(rep.residual_monotone_ok);
    CHECK(rep.subsolution_below_ok);
}

TEST_CASE("continuity solve on the deflated problem", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    auto [u, rep] = solver::continuity_solve(rp.spec);
    REQUIRE(rep.status == solver::SolveStatus::Converged);
    CHECK(rep.final_residual <= 1e-10);
    CHECK(rep.records.back().t == 1.0);
    CHECK(rep.total_newton_iters <= 12);
    // discrete solution tracks the manufactured target at O(h^2)
    const double h = rp.spec.grid.max_h();
    CHECK(u.max_abs_diff(rp.manufactured.ustar) <= 10.0 * h * h);
    CHECK(rep.cone_invariant_ok);
    CHECK(rep.residual_monotone_ok);
    CHECK(rep.subsolution_below_ok);
    // the subsolution stays below the solution along the whole path
    CHECK(rep.subsolution_worst_margin >= -(1e-8 + 10.0 * h * h));

    // sandwich between the subsolution and the trace supersolution
    const auto sw = problems::c0_sandwich_check(u, rp.spec);
    CHECK(sw.ok);
}

TEST_CASE("hypothesis gate: nonpositive alpha_l rejected before stepping", "[solver]") {
    const auto g = box_grid(2, 7);
    std::vector<Eigen::VectorXd> alpha{
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.interior_points()), 0.0),
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.interior_points()), 0.1)};
    const auto usub = analytic::AnalyticFunction::norm_sq(1.0).sample(g);
    CHECK_THROWS_AS(problems::ProblemSpec::create(g, 2, zero_chi0(g), alpha, usub, usub),
                    construction_error);
}

TEST_CASE("homotopy failure is reported with the step trace", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    solver::SolverConfig cfg;
    cfg.max_newton = 1;     // starve Newton so no t-step can converge
    cfg.t_min_step = 0.05;  // underflow quickly
    auto [u, rep] = solver::continuity_solve(rp.spec, cfg);
    CHECK(rep.status == solver::SolveStatus::HomotopyFailure);
    CHECK_FALSE(rep.failure_detail.empty());
    REQUIRE_FALSE(rep.records.empty());
    CHECK(rep.records.back().t < 1.0);
    // the returned iterate is the last accepted state, still admissible
    CHECK_NOTHROW(solver::residual(u, rp.spec, rep.records.back().t));
}

TEST_CASE("monotonicity audit on paired solves", "[solver]") {
    const auto rp = suites::make_reference_problem(7, true, 0.01);
    const solver::SolverConfig cfg;
    auto [u1, rep1] = solver::continuity_solve(rp.spec, cfg);
    REQUIRE(rep1.status == solver::SolveStatus::Converged);

    // same problem with the right-hand side lowered by 0.1:
    // alpha_{k-1} -> alpha_{k-1} - 0.1 C(n,k-1)/C(n,k)
    auto alpha2 = rp.spec.alpha;
    alpha2[1].array() -= 0.1 * binomial(2, 1) / binomial(2, 2);
    const auto spec2 = problems::ProblemSpec::create(rp.spec.grid, rp.spec.k, rp.spec.chi0,
                                                     alpha2, rp.spec.phi, rp.spec.usub);
    CHECK(spec2.coef(0).beta == Approx(rp.spec.coef(0).beta - 0.1));
    auto [u2, rep2] = solver::continuity_solve(spec2, cfg);
    REQUIRE(rep2.status == solver::SolveStatus::Converged);

    const double tol = 2.0 * cfg.newton_tol;
    // larger right-hand side pushes the solution down: u1 <= u2
    CHECK(solver::monotonicity_audit(u1, u2, tol));
    // equality case: both directions hold within 2 newton_tol
    CHECK(solver::monotonicity_audit(u1, u1, tol));
    // reversed inputs fail
    CHECK_FALSE(solver::monotonicity_audit(u2, u1, tol));
}
