#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "hmix/common.hpp"

namespace hmix::symfun {

/// Elementary symmetric functions e_0..e_n of a vector, by the stable
/// O(n^2) incremental recurrence
///   e_j(x_1..x_m) = e_j(x_1..x_{m-1}) + x_m * e_{j-1}(x_1..x_{m-1}).
/// Returns a vector of length n+1 with e_0 = 1.
[[nodiscard]] inline Eigen::VectorXd sigma_all(const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
    e(0) = 1.0;
    for (int m = 0; m < n; ++m) {
        for (int j = m + 1; j >= 1; --j) {
            e(j) += lambda(m) * e(j - 1);
        }
    }
    return e;
}

/// sigma_k(lambda). Only the first k rows of the recurrence are carried.
[[nodiscard]] inline double sigma(int k, const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n) {
        throw std::invalid_argument("sigma: order k=" + std::to_string(k) +
                                    " out of range [0," + std::to_string(n) + "]");
    }
    if (k == 0) return 1.0;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k + 1);
    e(0) = 1.0;
    for (int m = 0; m < n; ++m) {
        for (int j = std::min(k, m + 1); j >= 1; --j) {
            e(j) += lambda(m) * e(j - 1);
        }
    }
    return e(k);
}

namespace detail {

/// Recurrence with entry `skip` removed; used as the cancellation fallback.
[[nodiscard]] inline double sigma_without_entry(int k, const Eigen::VectorXd& lambda, int skip) {
    const int n = static_cast<int>(lambda.size());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k + 1);
    e(0) = 1.0;
    for (int m = 0; m < n; ++m) {
        if (m == skip) continue;
        for (int j = k; j >= 1; --j) {
            e(j) += lambda(m) * e(j - 1);
        }
    }
    return e(k);
}

} // namespace detail

/// sigma_k(lambda | i): the k-th symmetric function with entry i set to zero
/// (0-based i). Computed by the downdate recurrence
///   e_j(lambda|i) = e_j(lambda) - lambda_i * e_{j-1}(lambda|i),
/// with a direct recomputation fallback when lambda_i has the largest
/// magnitude and the downdate shows heavy cancellation.
[[nodiscard]] inline double sigma_excl(int k, const Eigen::VectorXd& lambda, int i) {
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n - 1) {
        throw std::invalid_argument("sigma_excl: order k=" + std::to_string(k) +
                                    " out of range [0," + std::to_string(n - 1) + "]");
    }
    if (i < 0 || i >= n) {
        throw std::invalid_argument("sigma_excl: index i=" + std::to_string(i) + " out of range");
    }
    if (k == 0) return 1.0;

    const Eigen::VectorXd e = sigma_all(lambda);
    const double li = lambda(i);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(k + 1);
    m(0) = 1.0;
    bool cancel_risk = false;
    for (int j = 1; j <= k; ++j) {
        const double a = e(j);
        const double b = li * m(j - 1);
        m(j) = a - b;
        const double scale = std::abs(a) + std::abs(b);
        if (scale > 0.0 && std::abs(m(j)) < 1e-8 * scale) cancel_risk = true;
    }
    if (cancel_risk && std::abs(li) >= lambda.cwiseAbs().maxCoeff() * (1.0 - 1e-15)) {
        return detail::sigma_without_entry(k, lambda, i);
    }
    return m(k);
}

/// True iff lambda lies in the open cone Gamma_k: sigma_1..sigma_k all > 0.
/// Gamma_0 is all of R^n.
[[nodiscard]] inline bool in_cone(const Eigen::VectorXd& lambda, int k) {
    if (k <= 0) return true;
    const Eigen::VectorXd e = sigma_all(lambda);
    for (int j = 1; j <= k; ++j) {
        if (!(e(j) > 0.0)) return false;
    }
    return true;
}

/// Cone membership with a scale-aware margin: sigma_j > eps * max(1,|lambda|_inf)^j
/// for j = 1..k. The power accounts for the homogeneity degree of sigma_j.
[[nodiscard]] inline bool in_cone_margin(const Eigen::VectorXd& lambda, int k, double eps) {
    if (k <= 0) return true;
    const Eigen::VectorXd e = sigma_all(lambda);
    const double s = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    double sj = s;
    for (int j = 1; j <= k; ++j) {
        if (!(e(j) > eps * sj)) return false;
        sj *= s;
    }
    return true;
}

/// Ordered eigenvalue vector with cached sigma_0..sigma_n.
struct Spectrum {
    Eigen::VectorXd values; // ascending
    Eigen::VectorXd sigmas; // length n+1, sigmas(0) == 1

    [[nodiscard]] static Spectrum from(Eigen::VectorXd v) {
        if (v.size() < 2) {
            throw std::invalid_argument("Spectrum: dimension must be >= 2");
        }
        std::sort(v.data(), v.data() + v.size());
        Spectrum s;
        s.sigmas = sigma_all(v);
        s.values = std::move(v);
        return s;
    }

    [[nodiscard]] int dim() const { return static_cast<int>(values.size()); }
};

/// Largest k with lambda in Gamma_k, together with the raw sigma_1..sigma_n
/// margins. Strict zero thresholds; callers apply their own margins.
struct ConeReport {
    int max_k = 0;
    Eigen::VectorXd margins; // sigma_1..sigma_n
};

[[nodiscard]] inline ConeReport cone_membership(const Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(lambda.size());
    const Eigen::VectorXd e = sigma_all(lambda);
    ConeReport r;
    r.margins = e.tail(n);
    r.max_k = 0;
    for (int j = 1; j <= n; ++j) {
        if (e(j) > 0.0) {
            r.max_k = j;
        } else {
            break;
        }
    }
    return r;
}

struct NewtonMacLaurin {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Generalized Newton-MacLaurin comparison on Gamma_k:
///   [ (sigma_k/C(n,k)) / (sigma_l/C(n,l)) ]^{1/(k-l)}
///     <= [ (sigma_r/C(n,r)) / (sigma_s/C(n,s)) ]^{1/(r-s)}
/// for n >= k > l >= 0, r > s >= 0, k >= r, l >= s.
[[nodiscard]] inline NewtonMacLaurin newton_maclaurin(const Eigen::VectorXd& lambda,
                                                      int k, int l, int r, int s) {
    const int n = static_cast<int>(lambda.size());
    if (!(n >= k && k > l && l >= 0 && r > s && s >= 0 && k >= r && l >= s)) {
        throw std::invalid_argument("newton_maclaurin: index conditions violated for (k,l,r,s)=(" +
                                    std::to_string(k) + "," + std::to_string(l) + "," +
                                    std::to_string(r) + "," + std::to_string(s) + ")");
    }
    if (!in_cone(lambda, k)) {
        throw std::domain_error("newton_maclaurin: lambda not in Gamma_k");
    }
    const Eigen::VectorXd e = sigma_all(lambda);
    const auto normalized = [&](int a) { return e(a) / binomial(n, a); };
    NewtonMacLaurin out;
    out.lhs = std::pow(normalized(k) / normalized(l), 1.0 / static_cast<double>(k - l));
    out.rhs = std::pow(normalized(r) / normalized(s), 1.0 / static_cast<double>(r - s));
    out.holds = out.lhs <= out.rhs + 1e-12 * std::abs(out.rhs);
    return out;
}

} // namespace hmix::symfun
