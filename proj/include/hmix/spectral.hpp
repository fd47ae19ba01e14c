#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hmix/symfun.hpp"

namespace hmix::spectral {

using Complex = std::complex<double>;

/// Hermitian matrix with the invariant enforced at construction:
/// entries(i,j) == conj(entries(j,i)) and exactly real diagonal.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    /// Validating constructor; rejects inputs whose Hermitian defect exceeds
    /// tol * max(1, |A|_F).
    [[nodiscard]] static HermitianMatrix checked(const Eigen::MatrixXcd& a, double tol = 1e-12) {
        if (a.rows() != a.cols()) {
            throw std::invalid_argument("HermitianMatrix: matrix must be square");
        }
        const double defect = (a - a.adjoint()).norm();
        if (defect > tol * std::max(1.0, a.norm())) {
            throw std::invalid_argument("HermitianMatrix: input is not Hermitian (defect " +
                                        std::to_string(defect) + ")");
        }
        return symmetrized(a);
    }

    /// Projects onto the Hermitian part (A + A^H)/2 and zeroes the imaginary
    /// diagonal exactly.
    [[nodiscard]] static HermitianMatrix symmetrized(const Eigen::MatrixXcd& a) {
        if (a.rows() != a.cols()) {
            throw std::invalid_argument("HermitianMatrix: matrix must be square");
        }
        HermitianMatrix h;
        h.m_ = 0.5 * (a + a.adjoint());
        for (Eigen::Index i = 0; i < h.m_.rows(); ++i) {
            h.m_(i, i) = Complex(h.m_(i, i).real(), 0.0);
        }
        return h;
    }

    [[nodiscard]] static HermitianMatrix identity(int n) {
        HermitianMatrix h;
        h.m_ = Eigen::MatrixXcd::Identity(n, n);
        return h;
    }

    [[nodiscard]] static HermitianMatrix real_diagonal(const Eigen::VectorXd& d) {
        HermitianMatrix h;
        h.m_ = Eigen::MatrixXcd::Zero(d.size(), d.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) h.m_(i, i) = d(i);
        return h;
    }

    [[nodiscard]] const Eigen::MatrixXcd& matrix() const { return m_; }
    [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] double norm() const { return m_.norm(); }
    [[nodiscard]] double trace_real() const { return m_.trace().real(); }

    [[nodiscard]] HermitianMatrix operator+(const HermitianMatrix& o) const {
        HermitianMatrix h;
        h.m_ = m_ + o.m_;
        return h;
    }

    [[nodiscard]] HermitianMatrix scaled(double c) const {
        HermitianMatrix h;
        h.m_ = c * m_;
        return h;
    }

private:
    Eigen::MatrixXcd m_;
};

/// Eigen-decomposition with ascending eigenvalues and deterministic
/// eigenvector phases (first component above threshold made real positive).
struct EigenPair {
    symfun::Spectrum lambda;
    Eigen::MatrixXcd basis; // unitary, columns are eigenvectors
};

namespace detail {

/// One cyclic sweep of complex Jacobi rotations applied in place.
/// Returns the off-diagonal Frobenius norm after the sweep.
inline double jacobi_sweep(Eigen::MatrixXcd& m, Eigen::MatrixXcd& v, double skip_threshold) {
    const int n = static_cast<int>(m.rows());
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const Complex apq = m(p, q);
            const double beta = std::abs(apq);
            if (beta <= skip_threshold) continue;
            const Complex phase = apq / beta; // e^{i phi}
            const double tau = (m(q, q).real() - m(p, p).real()) / (2.0 * beta);
            // smaller-magnitude root of t^2 - 2 tau t - 1 = 0
            const double t = (tau >= 0.0) ? -1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                          : 1.0 / (-tau + std::sqrt(1.0 + tau * tau));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;
            // unitary U: U(p,p)=c, U(p,q)=-s*phase, U(q,p)=s*conj(phase), U(q,q)=c
            for (int r = 0; r < n; ++r) {
                const Complex mrp = m(r, p);
                const Complex mrq = m(r, q);
                m(r, p) = c * mrp + s * std::conj(phase) * mrq;
                m(r, q) = -s * phase * mrp + c * mrq;
            }
            for (int r = 0; r < n; ++r) {
                const Complex mpr = m(p, r);
                const Complex mqr = m(q, r);
                m(p, r) = c * mpr + s * phase * mqr;
                m(q, r) = -s * std::conj(phase) * mpr + c * mqr;
            }
            m(p, p) = Complex(m(p, p).real(), 0.0);
            m(q, q) = Complex(m(q, q).real(), 0.0);
            m(p, q) = 0.0;
            m(q, p) = 0.0;
            for (int r = 0; r < n; ++r) {
                const Complex vrp = v(r, p);
                const Complex vrq = v(r, q);
                v(r, p) = c * vrp + s * std::conj(phase) * vrq;
                v(r, q) = -s * phase * vrp + c * vrq;
            }
        }
    }
    double off2 = 0.0;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (p != q) off2 += std::norm(m(p, q));
        }
    }
    return std::sqrt(off2);
}

} // namespace detail

/// Cyclic Jacobi eigensolver for Hermitian matrices. Fixed sweep order,
/// convergence when the off-diagonal Frobenius norm drops below 1e-14 |A|.
/// Deterministic for a given input.
[[nodiscard]] inline EigenPair eig_hermitian(const HermitianMatrix& a) {
    const int n = a.dim();
    Eigen::MatrixXcd m = a.matrix();
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);
    const double scale = std::max(a.norm(), 1e-300);
    const double target = 1e-14 * scale;
    const double skip = 1e-18 * scale;

    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const double off = detail::jacobi_sweep(m, v, skip);
        if (off <= target) break;
        if (sweep == kMaxSweeps - 1) {
            throw std::runtime_error("eig_hermitian: Jacobi iteration failed to converge");
        }
    }

    // ascending eigenvalue order with a stable index permutation
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int i, int j) { return m(i, i).real() < m(j, j).real(); });

    Eigen::VectorXd vals(n);
    Eigen::MatrixXcd basis(n, n);
    for (int j = 0; j < n; ++j) {
        vals(j) = m(perm[j], perm[j]).real();
        basis.col(j) = v.col(perm[j]);
    }

    // deterministic phase: first component of each column with magnitude
    // above 1e-12 is rotated to be real positive
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(basis(i, j));
            if (mag > 1e-12) {
                basis.col(j) *= std::conj(basis(i, j)) / mag;
                break;
            }
        }
    }

    EigenPair out;
    out.lambda = symfun::Spectrum::from(vals);
    out.basis = std::move(basis);
    return out;
}

/// dF/dA for F(A) = f(lambda(A)): U diag(fprime) U^H evaluated at the given
/// decomposition. fprime must be ordered like E.lambda.values.
[[nodiscard]] inline HermitianMatrix matrix_gradient(const Eigen::VectorXd& fprime,
                                                     const EigenPair& e) {
    if (fprime.size() != e.lambda.values.size()) {
        throw std::invalid_argument("matrix_gradient: gradient/eigenvalue size mismatch");
    }
    const Eigen::MatrixXcd g = e.basis * fprime.asDiagonal() * e.basis.adjoint();
    return HermitianMatrix::symmetrized(g);
}

/// Second derivative of F(A) = f(lambda(A)) contracted twice with a Hermitian
/// direction B:
///   sum_pq f_hess(p,q) bt_pp bt_qq + 2 sum_{p<q} (f_p - f_q)/(l_p - l_q) |bt_pq|^2
/// with bt = U^H B U. Near-degenerate pairs (|l_p - l_q| < 1e-9 (1+|l_p|))
/// use the smooth-extension limit f_hess(p,p) - f_hess(p,q).
[[nodiscard]] inline double second_derivative_form(const Eigen::MatrixXd& f_hess,
                                                   const Eigen::VectorXd& fprime,
                                                   const EigenPair& e,
                                                   const HermitianMatrix& b) {
    const int n = e.lambda.dim();
    if (f_hess.rows() != n || f_hess.cols() != n || fprime.size() != n || b.dim() != n) {
        throw std::invalid_argument("second_derivative_form: dimension mismatch");
    }
    const Eigen::MatrixXcd bt = e.basis.adjoint() * b.matrix() * e.basis;
    const Eigen::VectorXd& lam = e.lambda.values;

    double quad = 0.0;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            quad += f_hess(p, q) * bt(p, p).real() * bt(q, q).real();
        }
    }
    double cross = 0.0;
    for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const double gap = lam(p) - lam(q);
            double dd;
            if (std::abs(gap) < 1e-9 * (1.0 + std::abs(lam(p)))) {
                dd = f_hess(p, p) - f_hess(p, q);
            } else {
                dd = (fprime(p) - fprime(q)) / gap;
            }
            cross += 2.0 * dd * std::norm(bt(p, q));
        }
    }
    return quad + cross;
}

/// Cauchy interlacing check: eigenvalues of the leading (n-1)x(n-1) principal
/// minor must satisfy lam_j(A) <= lam'_j(A') <= lam_{j+1}(A) for all j
/// (tolerance 1e-10 |A|).
[[nodiscard]] inline bool interlacing_check(const HermitianMatrix& a) {
    const int n = a.dim();
    if (n < 2) {
        throw std::invalid_argument("interlacing_check: dimension must be >= 2");
    }
    const EigenPair full = eig_hermitian(a);
    const HermitianMatrix minor_m =
        HermitianMatrix::symmetrized(a.matrix().topLeftCorner(n - 1, n - 1));
    const double tol = 1e-10 * std::max(a.norm(), 1e-300);

    Eigen::VectorXd minor_vals;
    if (n - 1 == 1) {
        minor_vals = Eigen::VectorXd::Constant(1, minor_m.matrix()(0, 0).real());
    } else {
        minor_vals = eig_hermitian(minor_m).lambda.values;
    }
    for (int j = 0; j < n - 1; ++j) {
        if (!(full.lambda.values(j) <= minor_vals(j) + tol)) return false;
        if (!(minor_vals(j) <= full.lambda.values(j + 1) + tol)) return false;
    }
    return true;
}

} // namespace hmix::spectral
