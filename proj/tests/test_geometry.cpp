#include <catch2/catch_amalgamated.hpp>

#include "hmix/analytic.hpp"
#include "hmix/geometry.hpp"
#include "hmix/sampling.hpp"

using namespace hmix;
using Catch::Approx;

namespace {

geom::GridSpec unit_grid(int n, int pts, double lo_v = 0.0, double hi_v = 1.0) {
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2 * n, lo_v);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2 * n, hi_v);
    return geom::GridSpec::make(n, lo, hi, std::vector<int>(2 * n, pts));
}

geom::HermitianField zero_chi0(const geom::GridSpec& g) {
    return geom::HermitianField::constant(
        g, spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(g.n, g.n)));
}

} // namespace

TEST_CASE("GridSpec indexing and validation", "[geometry]") {
    const auto g = unit_grid(2, 7);
    CHECK(g.total_points() == 7 * 7 * 7 * 7);
    CHECK(g.interior_points() == 5 * 5 * 5 * 5);
    CHECK(g.h(0) == Approx(1.0 / 6.0));

    std::vector<int> mi{1, 2, 3, 4}, back;
    const std::size_t f = g.flat(mi);
    g.unflat(f, back);
    CHECK(back == mi);
    CHECK_FALSE(g.is_boundary(mi));
    CHECK(g.is_boundary({0, 2, 3, 4}));
    CHECK(g.is_boundary({1, 2, 3, 6}));

    const Eigen::VectorXd x = g.coords(mi);
    CHECK(x(0) == Approx(1.0 / 6.0));
    CHECK(x(3) == Approx(4.0 / 6.0));

    CHECK_THROWS_AS(unit_grid(2, 4), std::invalid_argument); // shape >= 5
    CHECK_THROWS_AS(geom::GridSpec::make(2, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4),
                                         {7, 7, 7, 7}),
                    std::invalid_argument); // hi > lo

    // interior iteration covers every interior point once, in flat order
    std::size_t count = 0, prev = 0;
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& at) {
        CHECK(ii == count);
        if (count > 0) CHECK(g.flat(at) > prev);
        prev = g.flat(at);
        ++count;
    });
    CHECK(count == g.interior_points());
}

TEST_CASE("complex_hessian exact on quadratics", "[geometry]") {
    const auto g = unit_grid(2, 7, -1.0, 1.0);

    // |z|^2 -> identity
    const auto usq = analytic::AnalyticFunction::norm_sq(1.0).sample(g);
    const auto h = geom::complex_hessian(usq);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        CHECK((h.at(ii).matrix() - Eigen::MatrixXcd::Identity(2, 2)).norm() <= 1e-12);
    });

    // pluriharmonic Re z_1^2 -> zero
    const auto upl = analytic::AnalyticFunction::re_z_squared(1.0, 0).sample(g);
    const auto hp = geom::complex_hessian(upl);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        CHECK(hp.at(ii).norm() <= 1e-12);
    });
}

TEST_CASE("complex_hessian quartic value and refinement order", "[geometry]") {
    const auto err_at = [&](int pts) {
        const auto g = unit_grid(1, pts, -1.0, 1.0);
        const auto u = analytic::AnalyticFunction::quartic_abs(1.0, 0).sample(g);
        const auto h = geom::complex_hessian(u);
        double worst = 0.0;
        g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
            const Eigen::VectorXd x = g.coords(mi);
            const double exact = 4.0 * (x(0) * x(0) + x(1) * x(1));
            worst = std::max(worst, std::abs(h.at(ii).matrix()(0, 0).real() - exact));
        });
        return worst;
    };
    const double e1 = err_at(9);
    const double e2 = err_at(17);
    // second-order stencils: halving h divides the error by 4 (+-20%)
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.20));
}

TEST_CASE("complex_hessian off-diagonal and Hermitian structure", "[geometry]") {
    // u = x_1 x_2 + y_1 y_2 has u_{1 2bar} = 1/2 exactly; u = x_1 y_2 gives
    // an imaginary off-diagonal entry i/4 * 2 = ... checked via the formula
    const auto g = unit_grid(2, 7, -1.0, 1.0);
    Eigen::VectorXd cxy = Eigen::VectorXd::Zero(4);
    const auto u = geom::GridFunction::sampled(
        g, [](const Eigen::VectorXd& x) { return x(0) * x(1) + x(2) * x(3); });
    const auto h = geom::complex_hessian(u);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        const auto& m = h.at(ii).matrix();
        CHECK(m(0, 1).real() == Approx(0.5).margin(1e-12));
        CHECK(m(0, 1).imag() == Approx(0.0).margin(1e-12));
        CHECK(m(1, 0) == std::conj(m(0, 1)));
        CHECK(m(0, 0).imag() == 0.0);
    });

    const auto v = geom::GridFunction::sampled(
        g, [](const Eigen::VectorXd& x) { return x(0) * x(3); }); // x_1 y_2
    const auto hv = geom::complex_hessian(v);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        const auto& m = hv.at(ii).matrix();
        CHECK(m(0, 1).imag() == Approx(0.25).margin(1e-12));
        CHECK(m(0, 1).real() == Approx(0.0).margin(1e-12));
    });
}

TEST_CASE("chi_u composition", "[geometry]") {
    const auto g = unit_grid(2, 7);
    const auto chi0 = geom::HermitianField::constant(
        g, spectral::HermitianMatrix::identity(2).scaled(0.5));

    // u = 0: chi_u == chi0
    const auto z = geom::GridFunction::zeros(g);
    const auto c0 = geom::chi_u(z, chi0);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        CHECK((c0.at(ii).matrix() - chi0.at(ii).matrix()).norm() <= 1e-15);
    });

    // chi0 = c I, u = |z|^2: (1 + c) I
    const auto usq = analytic::AnalyticFunction::norm_sq(1.0).sample(g);
    const auto c1 = geom::chi_u(usq, chi0);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        CHECK((c1.at(ii).matrix() - 1.5 * Eigen::MatrixXcd::Identity(2, 2)).norm() <= 1e-12);
    });
}

TEST_CASE("gradient_sup stated values", "[geometry]") {
    const auto g = unit_grid(2, 9, -1.0, 1.0);
    CHECK(geom::gradient_sup(geom::GridFunction::sampled(
              g, [](const Eigen::VectorXd&) { return 3.5; })) == 0.0);

    CHECK(geom::gradient_sup(geom::GridFunction::sampled(
              g, [](const Eigen::VectorXd& x) { return x(0); })) == Approx(1.0).epsilon(1e-12));

    // u = |z|^2: gradient 2*position, maximal at the interior corner
    const double h = g.h(0);
    const double expect = 2.0 * std::sqrt(4.0) * (1.0 - h);
    CHECK(geom::gradient_sup(analytic::AnalyticFunction::norm_sq(1.0).sample(g)) ==
          Approx(expect).epsilon(1e-12));
}

TEST_CASE("linearized_stencil identity coefficients is quarter Laplacian", "[geometry]") {
    const auto g = unit_grid(2, 7, -1.0, 1.0);
    const auto ident = geom::HermitianField::constant(g, spectral::HermitianMatrix::identity(2));
    const Eigen::SparseMatrix<double> lhs = geom::linearized_stencil(ident);

    // symmetric as a real matrix on the interior block (boundary rows are
    // Dirichlet identities and have no transpose partners)
    std::vector<Eigen::Index> interior_rows;
    g.for_each_interior([&](std::size_t, const std::vector<int>& mi) {
        interior_rows.push_back(static_cast<Eigen::Index>(g.flat(mi)));
    });
    Eigen::MatrixXd dense = Eigen::MatrixXd(lhs)(interior_rows, interior_rows);
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    // applying to |z|^2 gives trace(identity) = n at interior rows
    const auto usq = analytic::AnalyticFunction::norm_sq(1.0).sample(g);
    const Eigen::VectorXd uvec =
        Eigen::Map<const Eigen::VectorXd>(usq.values.data(),
                                          static_cast<Eigen::Index>(usq.values.size()));
    const Eigen::VectorXd lu = lhs * uvec;
    g.for_each_interior([&](std::size_t, const std::vector<int>& mi) {
        CHECK(lu(static_cast<Eigen::Index>(g.flat(mi))) == Approx(2.0).margin(1e-11));
    });
}

TEST_CASE("linearized_stencil weighted diagonal coefficients", "[geometry]") {
    const auto g = unit_grid(2, 7, -1.0, 1.0);
    const auto coeff = geom::HermitianField::constant(
        g, spectral::HermitianMatrix::real_diagonal(Eigen::Vector2d(2.0, 3.0)));
    const Eigen::SparseMatrix<double> lhs = geom::linearized_stencil(coeff);

    // apply to |z|^2: sum_i c_ii pointwise
    const auto usq = analytic::AnalyticFunction::norm_sq(1.0).sample(g);
    const Eigen::VectorXd uvec =
        Eigen::Map<const Eigen::VectorXd>(usq.values.data(),
                                          static_cast<Eigen::Index>(usq.values.size()));
    const Eigen::VectorXd lu = lhs * uvec;
    g.for_each_interior([&](std::size_t, const std::vector<int>& mi) {
        CHECK(lu(static_cast<Eigen::Index>(g.flat(mi))) == Approx(5.0).margin(1e-11));
    });

    // boundary rows are identity
    std::vector<int> mi{0, 3, 3, 3};
    const auto row = static_cast<Eigen::Index>(g.flat(mi));
    CHECK(lhs.coeff(row, row) == 1.0);
}

TEST_CASE("linearized_stencil equals the discrete directional derivative", "[geometry]") {
    // the sign oracle for the mixed terms: L w must match
    // (G(chi_{u+e w}) - G(chi_{u-e w})) / (2e) pointwise for a genuinely
    // complex coefficient field
    const auto g = unit_grid(2, 7, 0.0, 1.0);
    const auto chi0 = zero_chi0(g);

    const auto u = geom::GridFunction::sampled(g, [](const Eigen::VectorXd& x) {
        return x.squaredNorm() + 0.08 * x(0) * x(1) + 0.05 * x(0) * x(3) +
               0.03 * x(0) * x(0) * x(1);
    });
    const auto w = geom::GridFunction::sampled(g, [](const Eigen::VectorXd& x) {
        return std::sin(x(0)) * std::cos(0.5 * x(1)) + 0.2 * x(2) * x(2) * x(3) +
               0.1 * x(1) * x(3);
    });

    const auto coef = mixop::Coefficients::make(2, 2, Eigen::VectorXd::Constant(1, 0.5), 0.0);

    // coefficient field: gradient matrices at u
    geom::HermitianField coeff;
    coeff.grid = g;
    coeff.cells.resize(g.interior_points());
    {
        const auto chi = geom::chi_u(u, chi0);
        g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
            coeff.cells[ii] = mixop::evaluate_full(chi.at(ii), coef).grad_matrix;
        });
    }
    const Eigen::SparseMatrix<double> lhs = geom::linearized_stencil(coeff);
    const Eigen::VectorXd wvec = Eigen::Map<const Eigen::VectorXd>(
        w.values.data(), static_cast<Eigen::Index>(w.values.size()));
    const Eigen::VectorXd lw = lhs * wvec;

    const double eps = 1e-6;
    geom::GridFunction up = u, dn = u;
    for (std::size_t p = 0; p < u.values.size(); ++p) {
        up.values[p] += eps * w.values[p];
        dn.values[p] -= eps * w.values[p];
    }
    const auto chi_up = geom::chi_u(up, chi0);
    const auto chi_dn = geom::chi_u(dn, chi0);
    double worst = 0.0;
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        const double vp =
            mixop::evaluate(spectral::eig_hermitian(chi_up.at(ii)).lambda.values, coef);
        const double vd =
            mixop::evaluate(spectral::eig_hermitian(chi_dn.at(ii)).lambda.values, coef);
        const double fd = (vp - vd) / (2.0 * eps);
        worst = std::max(worst,
                         std::abs(lw(static_cast<Eigen::Index>(g.flat(mi))) - fd));
    });
    CHECK(worst <= 1e-6);
}

TEST_CASE("linearized_stencil rejects indefinite coefficients", "[geometry]") {
    const auto g = unit_grid(2, 7);
    const auto bad = geom::HermitianField::constant(
        g, spectral::HermitianMatrix::real_diagonal(Eigen::Vector2d(1.0, -0.5)));
    CHECK_THROWS_AS(geom::linearized_stencil(bad), admissibility_error);
}

TEST_CASE("stencil refinement order on a smooth non-quadratic", "[geometry]") {
    const auto err_at = [&](int pts) {
        const auto g = unit_grid(1, pts, 0.0, 1.0);
        const auto bump = analytic::AnalyticFunction::sin_bump(1.0, g.lo, g.hi);
        const auto u = bump.sample(g);
        const auto h = geom::complex_hessian(u);
        double worst = 0.0;
        g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
            const auto exact = bump.complex_hessian(g.coords(mi));
            worst = std::max(worst, (h.at(ii).matrix() - exact.matrix()).norm());
        });
        return worst;
    };
    const double e1 = err_at(9);
    const double e2 = err_at(17);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.20));
}
