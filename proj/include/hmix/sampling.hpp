#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>

#include "hmix/operator.hpp"
#include "hmix/spectral.hpp"
#include "hmix/symfun.hpp"

namespace hmix::sampling {

/// Seeded generator wrapper so every randomized suite is reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    [[nodiscard]] double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }

    [[nodiscard]] double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

    [[nodiscard]] int uniform_int(int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(gen_);
    }

    [[nodiscard]] std::complex<double> cgauss() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

private:
    std::mt19937_64 gen_;
};

[[nodiscard]] inline Eigen::VectorXd random_vector(Rng& rng, int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

/// Rejection sampling of Gamma_k with sigma_1..sigma_k > margin. Entries are
/// drawn from [-1, 3] so admissible vectors with negative components appear.
[[nodiscard]] inline Eigen::VectorXd random_cone_vector(Rng& rng, int n, int k,
                                                        double margin = 1e-3,
                                                        int max_tries = 200000) {
    for (int t = 0; t < max_tries; ++t) {
        Eigen::VectorXd v = random_vector(rng, n, -1.0, 3.0);
        const Eigen::VectorXd e = symfun::sigma_all(v);
        bool ok = true;
        for (int j = 1; j <= k; ++j) {
            if (!(e(j) > margin)) {
                ok = false;
                break;
            }
        }
        if (ok) return v;
    }
    throw std::runtime_error("random_cone_vector: rejection sampling exhausted");
}

[[nodiscard]] inline spectral::HermitianMatrix random_hermitian(Rng& rng, int n,
                                                                double scale = 1.0) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = scale * rng.cgauss();
    }
    return spectral::HermitianMatrix::symmetrized(m);
}

/// Haar-like random unitary: QR of a complex Gaussian matrix with the R
/// diagonal phases absorbed.
[[nodiscard]] inline Eigen::MatrixXcd random_unitary(Rng& rng, int n) {
    Eigen::MatrixXcd z(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) z(i, j) = rng.cgauss();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const std::complex<double> d = r(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0) q.col(j) *= d / mag;
    }
    return q;
}

/// Hermitian matrix with a prescribed-in-cone spectrum, pairwise eigenvalue
/// gaps of at least `gap` and sigma margins of at least `margin`, conjugated
/// by a random unitary. Suitable for finite-difference comparisons.
[[nodiscard]] inline spectral::HermitianMatrix random_admissible_matrix(Rng& rng, int n, int k,
                                                                        double gap = 1e-2,
                                                                        double margin = 1e-2) {
    for (int t = 0; t < 200000; ++t) {
        Eigen::VectorXd v = random_cone_vector(rng, n, k, margin);
        std::sort(v.data(), v.data() + n);
        bool ok = true;
        for (int i = 0; i + 1 < n; ++i) {
            if (v(i + 1) - v(i) < gap) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        const Eigen::MatrixXcd q = random_unitary(rng, n);
        return spectral::HermitianMatrix::symmetrized(q * v.asDiagonal() * q.adjoint());
    }
    throw std::runtime_error("random_admissible_matrix: sampling exhausted");
}

/// Random positive beta_l coefficients; beta is set to zero (callers solving
/// an equation overwrite it with the operator value).
[[nodiscard]] inline mixop::Coefficients random_coefficients(Rng& rng, int n, int k,
                                                             double lo = 0.1, double hi = 1.0) {
    Eigen::VectorXd bl(k - 1);
    for (int l = 0; l < k - 1; ++l) bl(l) = rng.uniform(lo, hi);
    return mixop::Coefficients::make(n, k, std::move(bl), 0.0);
}

} // namespace hmix::sampling
