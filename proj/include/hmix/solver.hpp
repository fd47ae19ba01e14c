#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hmix/geometry.hpp"
#include "hmix/linsolve.hpp"
#include "hmix/operator.hpp"
#include "hmix/problems.hpp"

namespace hmix::solver {

struct SolverConfig {
    double newton_tol = 1e-10;   // residual sup-norm target
    int max_newton = 30;
    double backtrack = 0.5;      // line-search shrink factor
    double min_step = 1e-6;      // smallest line-search fraction
    double t_step0 = 0.25;       // initial / maximal homotopy step
    double t_min_step = 1e-4;
    double linear_tol = 1e-12;   // relative residual of the inner solves
    double cone_margin = 1e-10;  // admissibility margin for accepted iterates
    std::size_t direct_threshold = 3000; // unknown count switch to Krylov

    void validate() const {
        if (!(newton_tol > 0 && max_newton > 0 && backtrack > 0 && backtrack < 1 &&
              min_step > 0 && t_step0 > 0 && t_min_step > 0 && linear_tol > 0 &&
              cone_margin > 0)) {
            throw std::invalid_argument("SolverConfig: all parameters must be positive");
        }
        if (!(linear_tol < newton_tol)) {
            throw std::invalid_argument("SolverConfig: need linear_tol < newton_tol");
        }
    }
};

struct TStepRecord {
    double t = 0.0;
    int newton_iters = 0;
    double residual = 0.0;
    double step = 0.0;    // homotopy step that reached this t
};

struct HomotopyState {
    double t = 0.0;
    geom::GridFunction u;
    double residual_inf = 0.0;
    int newton_iters = 0; // accepted Newton steps at the current t
    std::vector<TStepRecord> history;
};

enum class StepStatus { Converged, Accepted, Stall };
enum class SolveStatus { Converged, HomotopyFailure, LinearFailure };

struct SolveReport {
    SolveStatus status = SolveStatus::HomotopyFailure;
    double final_residual = 0.0;
    int total_newton_iters = 0;
    std::vector<TStepRecord> records;
    bool cone_invariant_ok = false;
    bool subsolution_below_ok = false;
    double subsolution_worst_margin = 0.0;
    bool residual_monotone_ok = false;
    double wall_seconds = 0.0;
    std::string failure_detail;
};

namespace detail {

/// Homotopy data computed once per problem: the t = 0 right-hand side is the
/// discrete operator value at the subsolution, so the start state solves the
/// t = 0 equation exactly.
struct Prepared {
    Eigen::VectorXd beta;  // target right-hand side (interior)
    Eigen::VectorXd b0;    // G(chi_usub), discrete (interior)

    [[nodiscard]] Eigen::VectorXd rhs(double t) const { return t * beta + (1.0 - t) * b0; }
};

[[nodiscard]] inline Prepared prepare(const problems::ProblemSpec& spec) {
    Prepared p;
    p.beta = spec.beta_field();
    p.b0.resize(static_cast<Eigen::Index>(spec.grid.interior_points()));
    const geom::HermitianField chi = geom::chi_u(spec.usub, spec.chi0);
    spec.grid.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        const spectral::EigenPair e = spectral::eig_hermitian(chi.at(ii));
        p.b0(static_cast<Eigen::Index>(ii)) = mixop::evaluate(e.lambda.values, spec.coef(ii));
    });
    return p;
}

struct FieldEval {
    Eigen::VectorXd residual; // interior
    double sup = 0.0;
    std::vector<spectral::HermitianMatrix> grad; // per interior point, if requested
};

/// Evaluates the residual field (and optionally the coefficient matrices of
/// the linearization) at u. Returns nothing if the admissibility margin is
/// violated; the violating flat indices are appended to `violations`.
[[nodiscard]] inline std::optional<FieldEval> try_eval(const geom::GridFunction& u,
                                                       const problems::ProblemSpec& spec,
                                                       const Eigen::VectorXd& rhs,
                                                       double cone_margin, bool want_grad,
                                                       std::vector<std::size_t>* violations = nullptr) {
    const geom::GridSpec& g = spec.grid;
    FieldEval out;
    out.residual.resize(static_cast<Eigen::Index>(g.interior_points()));
    if (want_grad) out.grad.resize(g.interior_points());

    const geom::HermitianField chi = geom::chi_u(u, spec.chi0);
    bool ok = true;
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        if (!ok && !violations) return;
        const spectral::EigenPair e = spectral::eig_hermitian(chi.at(ii));
        if (!symfun::in_cone_margin(e.lambda.values, spec.k - 1, cone_margin)) {
            ok = false;
            if (violations) violations->push_back(g.flat(mi));
            return;
        }
        const mixop::Coefficients& c = spec.coef(ii);
        const double val = mixop::evaluate_sigmas(e.lambda.sigmas, c);
        const double r = val - rhs(static_cast<Eigen::Index>(ii));
        out.residual(static_cast<Eigen::Index>(ii)) = r;
        out.sup = std::max(out.sup, std::abs(r));
        if (want_grad) {
            const Eigen::VectorXd f = mixop::lambda_gradient(e.lambda.values, c);
            out.grad[ii] = spectral::matrix_gradient(f, e);
        }
    });
    if (!ok) return std::nullopt;
    return out;
}

} // namespace detail

/// Residual field of the homotopy equation at parameter t:
/// interior entries G(chi_u) - [t beta + (1-t) G(chi_usub)], boundary entries
/// u - phi. Throws admissibility_error (with the violating point set) if u
/// leaves the cone margin.
[[nodiscard]] inline geom::GridFunction residual(const geom::GridFunction& u,
                                                 const problems::ProblemSpec& spec, double t,
                                                 double cone_margin = 1e-10) {
    const detail::Prepared prep = detail::prepare(spec);
    std::vector<std::size_t> bad;
    const auto eval = detail::try_eval(u, spec, prep.rhs(t), cone_margin, false, &bad);
    if (!eval) {
        throw admissibility_error("residual: iterate outside the admissibility cone at " +
                                  std::to_string(bad.size()) + " point(s)", bad);
    }
    geom::GridFunction r = geom::GridFunction::zeros(spec.grid);
    spec.grid.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        r.values[spec.grid.flat(mi)] = eval->residual(static_cast<Eigen::Index>(ii));
    });
    std::vector<int> mi(spec.grid.axes(), 0);
    for (std::size_t p = 0; p < r.values.size(); ++p) {
        spec.grid.unflat(p, mi);
        if (spec.grid.is_boundary(mi)) r.values[p] = u.values[p] - spec.phi.values[p];
    }
    return r;
}

namespace detail {

/// One damped Newton step at fixed t. Accepts the first line-search fraction
/// s in {1, backtrack, backtrack^2, ...} >= min_step that keeps the cone
/// margin and shrinks the residual sup-norm to at most (1 - s/4) of the
/// previous value.
[[nodiscard]] inline StepStatus newton_step_prepared(HomotopyState& state,
                                                     const problems::ProblemSpec& spec,
                                                     const Prepared& prep, double t,
                                                     const SolverConfig& cfg) {
    const geom::GridSpec& g = spec.grid;
    const Eigen::VectorXd rhs = prep.rhs(t);

    auto cur = try_eval(state.u, spec, rhs, cfg.cone_margin, true);
    if (!cur) {
        throw admissibility_error("newton_step: current iterate inadmissible", {});
    }
    state.residual_inf = cur->sup;
    if (cur->sup <= cfg.newton_tol) return StepStatus::Converged;

    geom::HermitianField coeff;
    coeff.grid = g;
    coeff.cells = std::move(cur->grad);
    const Eigen::SparseMatrix<double> lhs = geom::linearized_stencil(coeff);

    Eigen::VectorXd sys_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.total_points()));
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        sys_rhs(static_cast<Eigen::Index>(g.flat(mi))) =
            -cur->residual(static_cast<Eigen::Index>(ii));
    });
    const linsolve::Result lin =
        linsolve::solve_sparse(lhs, sys_rhs, cfg.linear_tol, g.interior_points(),
                               cfg.direct_threshold);

    for (double s = 1.0; s >= cfg.min_step; s *= cfg.backtrack) {
        geom::GridFunction cand = state.u;
        g.for_each_interior([&](std::size_t, const std::vector<int>& mi) {
            const std::size_t p = g.flat(mi);
            cand.values[p] += s * lin.x(static_cast<Eigen::Index>(p));
        });
        const auto next = try_eval(cand, spec, rhs, cfg.cone_margin, false);
        if (!next) continue;
        if (next->sup <= (1.0 - 0.25 * s) * cur->sup) {
            state.u = std::move(cand);
            state.residual_inf = next->sup;
            state.newton_iters += 1;
            return StepStatus::Accepted;
        }
    }
    return StepStatus::Stall;
}

} // namespace detail

/// Public single-step entry point (recomputes the homotopy data; the driver
/// below caches it).
[[nodiscard]] inline StepStatus newton_step(HomotopyState& state,
                                            const problems::ProblemSpec& spec, double t,
                                            const SolverConfig& cfg) {
    cfg.validate();
    const detail::Prepared prep = detail::prepare(spec);
    return detail::newton_step_prepared(state, spec, prep, t, cfg);
}

/// Continuity-method driver: starts at t = 0 from the subsolution, advances
/// t adaptively (halve the step after a failed Newton solve, grow it back up
/// to t_step0 after success) until t = 1. Every accepted state keeps the
/// admissibility margin; failure to reach t = 1 is reported with the full
/// step history, never silently.
[[nodiscard]] inline std::pair<geom::GridFunction, SolveReport> continuity_solve(
    const problems::ProblemSpec& spec, const SolverConfig& cfg = {}) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    SolveReport rep;
    HomotopyState state;
    state.u = spec.usub;
    state.t = 0.0;

    const double sandwich_tol = 1e-8 + 10.0 * spec.grid.max_h() * spec.grid.max_h();
    rep.cone_invariant_ok = true;
    rep.residual_monotone_ok = true;
    rep.subsolution_below_ok = true;
    rep.subsolution_worst_margin = 0.0;

    const auto audit_state = [&]() {
        double worst = 0.0;
        for (std::size_t p = 0; p < state.u.values.size(); ++p) {
            worst = std::min(worst, state.u.values[p] - spec.usub.values[p]);
        }
        rep.subsolution_worst_margin = std::min(rep.subsolution_worst_margin, worst);
        if (worst < -sandwich_tol) rep.subsolution_below_ok = false;
    };

    try {
        const detail::Prepared prep = detail::prepare(spec);

        // t = 0: the subsolution solves the start equation exactly
        {
            const auto e0 = detail::try_eval(state.u, spec, prep.rhs(0.0), cfg.cone_margin, false);
            if (!e0) {
                throw admissibility_error("continuity_solve: subsolution violates the cone margin",
                                          {});
            }
            state.residual_inf = e0->sup;
            if (e0->sup > cfg.newton_tol) {
                // genuinely nonzero start residual would mean b0 was not the
                // operator value at usub; treat as construction failure
                throw construction_error("continuity_solve: nonzero residual at t = 0 (" +
                                         std::to_string(e0->sup) + ")");
            }
            rep.records.push_back({0.0, 0, e0->sup, 0.0});
        }

        double step = cfg.t_step0;
        while (state.t < 1.0) {
            const double t_next = std::min(state.t + step, 1.0);
            const geom::GridFunction backup = state.u;
            const double backup_resid = state.residual_inf;

            state.newton_iters = 0;
            bool success = false;
            double prev_resid = std::numeric_limits<double>::infinity();
            while (true) {
                const StepStatus st = detail::newton_step_prepared(state, spec, prep, t_next, cfg);
                if (st == StepStatus::Converged) {
                    success = true;
                    break;
                }
                if (st == StepStatus::Stall) break;
                // Accepted
                if (state.residual_inf >= prev_resid) rep.residual_monotone_ok = false;
                prev_resid = state.residual_inf;
                if (state.residual_inf <= cfg.newton_tol) {
                    success = true;
                    break;
                }
                if (state.newton_iters >= cfg.max_newton) break;
            }

            if (success) {
                state.t = t_next;
                rep.total_newton_iters += state.newton_iters;
                rep.records.push_back({t_next, state.newton_iters, state.residual_inf, step});
                state.history = rep.records;
                audit_state();
                step = std::min(step * 2.0, cfg.t_step0);
            } else {
                state.u = backup;
                state.residual_inf = backup_resid;
                step *= 0.5;
                if (step < cfg.t_min_step) {
                    rep.status = SolveStatus::HomotopyFailure;
                    rep.final_residual = state.residual_inf;
                    rep.failure_detail = "homotopy step underflow at t = " +
                                         std::to_string(state.t) + " (target " +
                                         std::to_string(t_next) + ")";
                    rep.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                            .count();
                    return {state.u, rep};
                }
            }
        }
        rep.status = SolveStatus::Converged;
        rep.final_residual = state.residual_inf;
    } catch (const linsolve::linear_failure& e) {
        rep.status = SolveStatus::LinearFailure;
        rep.failure_detail = e.what();
        rep.final_residual = state.residual_inf;
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {state.u, rep};
}

/// Comparison audit for paired solves: with rhs_1 >= rhs_2 (pointwise) the
/// solutions must satisfy u1 <= u2 + tol everywhere.
[[nodiscard]] inline bool monotonicity_audit(const geom::GridFunction& u1,
                                             const geom::GridFunction& u2, double tol) {
    if (!u1.grid.same_layout(u2.grid)) {
        throw std::invalid_argument("monotonicity_audit: grid mismatch");
    }
    for (std::size_t p = 0; p < u1.values.size(); ++p) {
        if (u1.values[p] > u2.values[p] + tol) return false;
    }
    return true;
}

} // namespace hmix::solver
