#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <stdexcept>
#include <string>

namespace hmix::linsolve {

class linear_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Result {
    Eigen::VectorXd x;
    double rel_residual = 0.0;
    int iterations = 0;   // 0 for the direct path
    bool direct = false;
};

/// Solves L x = b to the requested relative residual. Direct sparse LU when
/// the unknown count is at or below `direct_threshold`, otherwise BiCGSTAB
/// with an incomplete-LU preconditioner. Deterministic (single-threaded).
/// The default threshold is low: LU fill-in on the 33-point 4D stencil makes
/// direct factorization slower than the preconditioned iteration well before
/// 10^4 unknowns (measured 163 s vs 4 s at 14641 unknowns).
[[nodiscard]] inline Result solve_sparse(const Eigen::SparseMatrix<double>& lhs,
                                         const Eigen::VectorXd& b, double rel_tol,
                                         std::size_t unknowns,
                                         std::size_t direct_threshold = 3000) {
    Result r;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        r.x = Eigen::VectorXd::Zero(b.size());
        r.direct = unknowns <= direct_threshold;
        return r;
    }

    if (unknowns <= direct_threshold) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(lhs);
        lu.factorize(lhs);
        if (lu.info() != Eigen::Success) {
            throw linear_failure("solve_sparse: sparse LU factorization failed");
        }
        r.x = lu.solve(b);
        r.direct = true;
    } else {
        // preconditioner ladder: cheap first, stronger on stagnation
        const double droptols[] = {1e-2, 1e-4, 1e-6};
        const int fills[] = {5, 15, 40};
        bool solved = false;
        for (int attempt = 0; attempt < 3 && !solved; ++attempt) {
            Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> krylov;
            krylov.preconditioner().setDroptol(droptols[attempt]);
            krylov.preconditioner().setFillfactor(fills[attempt]);
            krylov.setTolerance(rel_tol);
            krylov.setMaxIterations(4000);
            krylov.compute(lhs);
            if (krylov.info() != Eigen::Success) continue;
            r.x = krylov.solve(b);
            r.iterations = static_cast<int>(krylov.iterations());
            solved = krylov.info() == Eigen::Success &&
                     (lhs * r.x - b).norm() <= rel_tol * 1.05 * bnorm;
        }
        if (!solved) {
            throw linear_failure("solve_sparse: Krylov iteration did not reach tolerance");
        }
    }

    r.rel_residual = (lhs * r.x - b).norm() / bnorm;
    if (!(r.rel_residual <= rel_tol * 1.05)) {
        throw linear_failure("solve_sparse: relative residual " +
                             std::to_string(r.rel_residual) + " above tolerance");
    }
    return r;
}

} // namespace hmix::linsolve
