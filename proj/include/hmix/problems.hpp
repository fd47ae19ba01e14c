#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hmix/analytic.hpp"
#include "hmix/geometry.hpp"
#include "hmix/linsolve.hpp"
#include "hmix/operator.hpp"

namespace hmix::problems {

/// Discrete Dirichlet problem: grid, order k, background form chi_0, raw
/// coefficient fields alpha_0..alpha_{k-1} (alpha_l > 0 for l <= k-2, the
/// last one sign-free), boundary data phi and an admissible subsolution.
/// Construction verifies, at every interior point with the discrete Hessian:
///   - lambda(chi_usub) in Gamma_{k-1},
///   - G(chi_usub) >= beta - 1e-10,
///   - usub == phi on the boundary layer (bitwise).
struct ProblemSpec {
    geom::GridSpec grid;
    int k = 0;
    geom::HermitianField chi0;
    std::vector<Eigen::VectorXd> alpha;   // k fields over interior points
    std::vector<mixop::Coefficients> coeffs; // normalized, per interior point
    geom::GridFunction phi;               // boundary layer authoritative
    geom::GridFunction usub;

    [[nodiscard]] static ProblemSpec create(geom::GridSpec grid, int k, geom::HermitianField chi0,
                                            std::vector<Eigen::VectorXd> alpha,
                                            geom::GridFunction phi, geom::GridFunction usub);

    [[nodiscard]] const mixop::Coefficients& coef(std::size_t interior_idx) const {
        return coeffs[interior_idx];
    }

    [[nodiscard]] Eigen::VectorXd beta_field() const {
        Eigen::VectorXd b(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i) b(i) = coeffs[i].beta;
        return b;
    }
};

namespace detail {

inline std::string point_str(const geom::GridSpec& g, std::size_t flat) {
    std::vector<int> mi;
    g.unflat(flat, mi);
    const Eigen::VectorXd x = g.coords(mi);
    std::ostringstream os;
    os << "(";
    for (int a = 0; a < g.axes(); ++a) os << (a ? "," : "") << x(a);
    os << ")";
    return os.str();
}

} // namespace detail

inline ProblemSpec ProblemSpec::create(geom::GridSpec grid, int k, geom::HermitianField chi0,
                                       std::vector<Eigen::VectorXd> alpha,
                                       geom::GridFunction phi, geom::GridFunction usub) {
    const int n = grid.n;
    if (k < 1 || k > n) {
        throw construction_error("ProblemSpec: need 1 <= k <= n");
    }
    if (static_cast<int>(alpha.size()) != k) {
        throw construction_error("ProblemSpec: expected " + std::to_string(k) +
                                 " alpha fields, got " + std::to_string(alpha.size()));
    }
    const std::size_t interior = grid.interior_points();
    for (const auto& a : alpha) {
        if (static_cast<std::size_t>(a.size()) != interior) {
            throw construction_error("ProblemSpec: alpha field size mismatch");
        }
    }
    if (!grid.same_layout(chi0.grid) || !grid.same_layout(phi.grid) ||
        !grid.same_layout(usub.grid)) {
        throw construction_error("ProblemSpec: grid mismatch between fields");
    }

    ProblemSpec s;
    s.grid = std::move(grid);
    s.k = k;
    s.chi0 = std::move(chi0);
    s.alpha = std::move(alpha);
    s.phi = std::move(phi);
    s.usub = std::move(usub);

    // boundary data: the subsolution must carry phi exactly
    {
        std::vector<int> mi(s.grid.axes(), 0);
        std::vector<std::size_t> bad;
        for (std::size_t p = 0; p < s.grid.total_points(); ++p) {
            s.grid.unflat(p, mi);
            if (s.grid.is_boundary(mi) && s.usub.values[p] != s.phi.values[p]) {
                bad.push_back(p);
            }
        }
        if (!bad.empty()) {
            throw construction_error("ProblemSpec: subsolution does not equal phi on " +
                                     std::to_string(bad.size()) + " boundary point(s), first at " +
                                     detail::point_str(s.grid, bad.front()), bad);
        }
    }

    // normalized coefficients per interior point (validates alpha_l > 0)
    s.coeffs.reserve(interior);
    Eigen::VectorXd a_point(k);
    for (std::size_t ii = 0; ii < interior; ++ii) {
        for (int l = 0; l < k; ++l) a_point(l) = s.alpha[l](ii);
        try {
            s.coeffs.push_back(mixop::normalize_coefficients(a_point, n, k));
        } catch (const std::exception& e) {
            throw construction_error("ProblemSpec: coefficient positivity violated at interior point " +
                                     std::to_string(ii) + ": " + e.what());
        }
    }

    // subsolution admissibility and inequality, with the discrete Hessian
    const geom::HermitianField chi = geom::chi_u(s.usub, s.chi0);
    std::vector<std::size_t> cone_bad, ineq_bad;
    double worst = 0.0;
    s.grid.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        const spectral::EigenPair e = spectral::eig_hermitian(chi.at(ii));
        if (!symfun::in_cone(e.lambda.values, k - 1)) {
            cone_bad.push_back(s.grid.flat(mi));
            return;
        }
        const double g = mixop::evaluate(e.lambda.values, s.coeffs[ii]);
        const double margin = g - s.coeffs[ii].beta;
        if (margin < -1e-10) {
            ineq_bad.push_back(s.grid.flat(mi));
            worst = std::min(worst, margin);
        }
    });
    if (!cone_bad.empty()) {
        throw construction_error("ProblemSpec: subsolution not admissible at " +
                                 std::to_string(cone_bad.size()) + " point(s), first at " +
                                 detail::point_str(s.grid, cone_bad.front()), cone_bad);
    }
    if (!ineq_bad.empty()) {
        throw construction_error("ProblemSpec: subsolution inequality violated at " +
                                 std::to_string(ineq_bad.size()) + " point(s), worst margin " +
                                 std::to_string(worst) + ", first at " +
                                 detail::point_str(s.grid, ineq_bad.front()), ineq_bad);
    }
    return s;
}

/// Problem with a prescribed exact solution: the right-hand side is defined
/// pointwise as beta(z) = G(chi_{ustar}(z)) from the analytic Hessian of
/// ustar, so the discrete solve has a known target.
struct ManufacturedProblem {
    ProblemSpec spec;
    geom::GridFunction ustar;
    Eigen::VectorXd beta_field;   // interior
    analytic::AnalyticFunction ustar_fn;
};

/// Builds a ManufacturedProblem from normalized low-order coefficient fields
/// beta_0..beta_{k-2} and an analytic ustar. phi := ustar on the boundary and
/// usub := ustar (equality subsolution).
[[nodiscard]] inline ManufacturedProblem manufacture(const geom::GridSpec& grid, int k,
                                                     const geom::HermitianField& chi0,
                                                     const std::vector<Eigen::VectorXd>& beta_low,
                                                     const analytic::AnalyticFunction& ustar_fn) {
    const int n = grid.n;
    if (k < 1 || k > n) throw construction_error("manufacture: need 1 <= k <= n");
    if (static_cast<int>(beta_low.size()) != k - 1) {
        throw construction_error("manufacture: expected " + std::to_string(k - 1) +
                                 " beta_l fields");
    }
    for (int l = 0; l < k - 1; ++l) {
        if (!(beta_low[l].minCoeff() > 0.0)) {
            throw construction_error("manufacture: coefficient positivity violated (beta_" +
                                     std::to_string(l) + " has nonpositive values)");
        }
    }
    const std::size_t interior = grid.interior_points();

    Eigen::VectorXd beta(interior);
    std::vector<std::size_t> bad;
    Eigen::VectorXd bl(k - 1);
    grid.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        const spectral::HermitianMatrix chi =
            ustar_fn.complex_hessian(grid.coords(mi)) + chi0.at(ii);
        const spectral::EigenPair e = spectral::eig_hermitian(chi);
        if (!symfun::in_cone(e.lambda.values, k - 1)) {
            bad.push_back(grid.flat(mi));
            return;
        }
        for (int l = 0; l < k - 1; ++l) bl(l) = beta_low[l](ii);
        const mixop::Coefficients c = mixop::Coefficients::make(n, k, bl, 0.0);
        beta(ii) = mixop::evaluate(e.lambda.values, c);
    });
    if (!bad.empty()) {
        throw construction_error("manufacture: ustar not admissible at " +
                                 std::to_string(bad.size()) + " point(s), first at " +
                                 detail::point_str(grid, bad.front()), bad);
    }

    // store raw alpha fields: alpha_l = (C(n,l)/C(n,k)) beta_l, last from beta
    const double cnk = binomial(n, k);
    std::vector<Eigen::VectorXd> alpha(k);
    for (int l = 0; l < k - 1; ++l) {
        alpha[l] = beta_low[l] * (binomial(n, l) / cnk);
    }
    alpha[k - 1] = beta * (binomial(n, k - 1) / cnk);

    ManufacturedProblem mp;
    mp.ustar = ustar_fn.sample(grid);
    mp.beta_field = beta;
    mp.ustar_fn = ustar_fn;
    mp.spec = ProblemSpec::create(grid, k, chi0, std::move(alpha), mp.ustar, mp.ustar);
    return mp;
}

/// Strict subsolution by deflation: usub := ustar - c * bump on the interior
/// (the boundary keeps ustar bitwise, so usub == phi there). The resulting
/// spec is re-verified; an inadmissible c is rejected with diagnostics.
[[nodiscard]] inline ProblemSpec deflate_subsolution(const ManufacturedProblem& mp, double c,
                                                     const analytic::AnalyticFunction& bump) {
    if (c < 0.0) throw std::invalid_argument("deflate_subsolution: c must be >= 0");
    const geom::GridSpec& g = mp.spec.grid;
    geom::GridFunction usub = mp.ustar;
    g.for_each_interior([&](std::size_t, const std::vector<int>& at) {
        const std::size_t p = g.flat(at);
        const double eta = bump.value(g.coords(at));
        if (eta < 0.0) {
            throw std::invalid_argument("deflate_subsolution: bump must be nonnegative");
        }
        usub.values[p] -= c * eta;
    });
    return ProblemSpec::create(g, mp.spec.k, mp.spec.chi0, mp.spec.alpha, mp.spec.phi,
                               std::move(usub));
}

/// Upper barrier: solves the linear trace equation
///   trace(chi_0 + dd^c v) = 0,  v = phi on the boundary,
/// i.e. the identity-coefficient stencil with right-hand side -trace(chi_0).
[[nodiscard]] inline geom::GridFunction supersolution(const ProblemSpec& spec,
                                                      double linear_tol = 1e-12) {
    const geom::GridSpec& g = spec.grid;
    const geom::HermitianField ident =
        geom::HermitianField::constant(g, spectral::HermitianMatrix::identity(g.n));
    const Eigen::SparseMatrix<double> lhs = geom::linearized_stencil(ident);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.total_points()));
    {
        std::vector<int> mi(g.axes(), 0);
        for (std::size_t p = 0; p < g.total_points(); ++p) {
            g.unflat(p, mi);
            if (g.is_boundary(mi)) rhs(static_cast<Eigen::Index>(p)) = spec.phi.values[p];
        }
    }
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        rhs(static_cast<Eigen::Index>(g.flat(mi))) = -spec.chi0.at(ii).trace_real();
    });

    const linsolve::Result res = linsolve::solve_sparse(lhs, rhs, linear_tol, g.interior_points());
    geom::GridFunction v = geom::GridFunction::zeros(g);
    for (std::size_t p = 0; p < v.values.size(); ++p) {
        v.values[p] = res.x(static_cast<Eigen::Index>(p));
    }
    return v;
}

/// Pointwise barrier check usub - tol <= u <= v + tol with
/// tol = 1e-8 + 10 h_max^2. Returns the most negative margin.
struct SandwichResult {
    bool ok = false;
    double worst = 0.0;
    double tol = 0.0;
};

[[nodiscard]] inline SandwichResult c0_sandwich_check(const geom::GridFunction& u,
                                                      const ProblemSpec& spec,
                                                      const geom::GridFunction* v_precomputed = nullptr) {
    const double h = spec.grid.max_h();
    SandwichResult r;
    r.tol = 1e-8 + 10.0 * h * h;
    geom::GridFunction v = v_precomputed ? *v_precomputed : supersolution(spec);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < u.values.size(); ++p) {
        worst = std::min(worst, u.values[p] - spec.usub.values[p]);
        worst = std::min(worst, v.values[p] - u.values[p]);
    }
    r.worst = worst;
    r.ok = worst >= -r.tol;
    return r;
}

} // namespace hmix::problems
