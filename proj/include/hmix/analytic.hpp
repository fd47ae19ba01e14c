#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmix/geometry.hpp"
#include "hmix/spectral.hpp"

namespace hmix::analytic {

/// One closed-form term of a potential. Coordinates are (x_1..x_n, y_1..y_n);
/// `axis` refers to a complex coordinate z_j (0-based).
struct Term {
    enum class Kind { Constant, NormSq, QuarticAbs, ReLinear, ReZSquared, SinBump };

    Kind kind = Kind::Constant;
    double coeff = 0.0;
    int axis = 0;               // QuarticAbs, ReZSquared
    Eigen::VectorXd lin;        // ReLinear coefficients, size 2n
    Eigen::VectorXd lo, hi;     // SinBump box, size 2n
};

/// Sum of terms with analytic value, gradient and real Hessian; the complex
/// Hessian is assembled from the real one.
class AnalyticFunction {
public:
    AnalyticFunction() = default;
    explicit AnalyticFunction(std::vector<Term> terms) : terms_(std::move(terms)) {}

    [[nodiscard]] static AnalyticFunction zero() { return AnalyticFunction{}; }

    [[nodiscard]] static AnalyticFunction constant(double c) {
        Term t;
        t.kind = Term::Kind::Constant;
        t.coeff = c;
        return AnalyticFunction({t});
    }

    /// c * |z|^2
    [[nodiscard]] static AnalyticFunction norm_sq(double c) {
        Term t;
        t.kind = Term::Kind::NormSq;
        t.coeff = c;
        return AnalyticFunction({t});
    }

    /// c * |z_axis|^4
    [[nodiscard]] static AnalyticFunction quartic_abs(double c, int axis) {
        Term t;
        t.kind = Term::Kind::QuarticAbs;
        t.coeff = c;
        t.axis = axis;
        return AnalyticFunction({t});
    }

    /// sum_a lin(a) * t_a
    [[nodiscard]] static AnalyticFunction re_linear(Eigen::VectorXd lin) {
        Term t;
        t.kind = Term::Kind::ReLinear;
        t.coeff = 1.0;
        t.lin = std::move(lin);
        return AnalyticFunction({t});
    }

    /// c * Re(z_axis^2) = c (x_axis^2 - y_axis^2); pluriharmonic
    [[nodiscard]] static AnalyticFunction re_z_squared(double c, int axis) {
        Term t;
        t.kind = Term::Kind::ReZSquared;
        t.coeff = c;
        t.axis = axis;
        return AnalyticFunction({t});
    }

    /// c * prod_a sin(pi (t_a - lo_a)/(hi_a - lo_a)); vanishes on the box faces
    [[nodiscard]] static AnalyticFunction sin_bump(double c, Eigen::VectorXd lo,
                                                   Eigen::VectorXd hi) {
        Term t;
        t.kind = Term::Kind::SinBump;
        t.coeff = c;
        t.lo = std::move(lo);
        t.hi = std::move(hi);
        return AnalyticFunction({t});
    }

    [[nodiscard]] AnalyticFunction plus(const AnalyticFunction& o) const {
        std::vector<Term> ts = terms_;
        ts.insert(ts.end(), o.terms_.begin(), o.terms_.end());
        return AnalyticFunction(std::move(ts));
    }

    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

    [[nodiscard]] double value(const Eigen::VectorXd& t) const {
        double v = 0.0;
        for (const Term& tm : terms_) v += term_value(tm, t);
        return v;
    }

    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& t) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(t.size());
        for (const Term& tm : terms_) term_gradient(tm, t, g);
        return g;
    }

    [[nodiscard]] Eigen::MatrixXd real_hessian(const Eigen::VectorXd& t) const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(t.size(), t.size());
        for (const Term& tm : terms_) term_hessian(tm, t, h);
        return h;
    }

    /// u_{i jbar} = 1/4 [(H_xx + H_yy) + i (H_xy - H_yx)] blocks of the real
    /// Hessian; n is the complex dimension (t has 2n entries).
    [[nodiscard]] spectral::HermitianMatrix complex_hessian(const Eigen::VectorXd& t) const {
        const int n = static_cast<int>(t.size()) / 2;
        const Eigen::MatrixXd h = real_hessian(t);
        Eigen::MatrixXcd m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double re = 0.25 * (h(i, j) + h(n + i, n + j));
                const double im = 0.25 * (h(i, n + j) - h(n + i, j));
                m(i, j) = std::complex<double>(re, im);
            }
        }
        return spectral::HermitianMatrix::symmetrized(m);
    }

    [[nodiscard]] geom::GridFunction sample(const geom::GridSpec& g) const {
        return geom::GridFunction::sampled(g, [&](const Eigen::VectorXd& x) { return value(x); });
    }

private:
    static double term_value(const Term& tm, const Eigen::VectorXd& t) {
        const int n = static_cast<int>(t.size()) / 2;
        switch (tm.kind) {
        case Term::Kind::Constant:
            return tm.coeff;
        case Term::Kind::NormSq:
            return tm.coeff * t.squaredNorm();
        case Term::Kind::QuarticAbs: {
            const double r2 = t(tm.axis) * t(tm.axis) + t(n + tm.axis) * t(n + tm.axis);
            return tm.coeff * r2 * r2;
        }
        case Term::Kind::ReLinear:
            return tm.coeff * tm.lin.dot(t);
        case Term::Kind::ReZSquared:
            return tm.coeff * (t(tm.axis) * t(tm.axis) - t(n + tm.axis) * t(n + tm.axis));
        case Term::Kind::SinBump: {
            double v = tm.coeff;
            for (Eigen::Index a = 0; a < t.size(); ++a) {
                v *= std::sin(M_PI * (t(a) - tm.lo(a)) / (tm.hi(a) - tm.lo(a)));
            }
            return v;
        }
        }
        return 0.0;
    }

    static void term_gradient(const Term& tm, const Eigen::VectorXd& t, Eigen::VectorXd& g) {
        const int n = static_cast<int>(t.size()) / 2;
        switch (tm.kind) {
        case Term::Kind::Constant:
            return;
        case Term::Kind::NormSq:
            g += 2.0 * tm.coeff * t;
            return;
        case Term::Kind::QuarticAbs: {
            const double x = t(tm.axis), y = t(n + tm.axis);
            const double r2 = x * x + y * y;
            g(tm.axis) += 4.0 * tm.coeff * r2 * x;
            g(n + tm.axis) += 4.0 * tm.coeff * r2 * y;
            return;
        }
        case Term::Kind::ReLinear:
            g += tm.coeff * tm.lin;
            return;
        case Term::Kind::ReZSquared:
            g(tm.axis) += 2.0 * tm.coeff * t(tm.axis);
            g(n + tm.axis) -= 2.0 * tm.coeff * t(n + tm.axis);
            return;
        case Term::Kind::SinBump: {
            const Eigen::Index ax = t.size();
            Eigen::VectorXd s(ax), c(ax), w(ax);
            for (Eigen::Index a = 0; a < ax; ++a) {
                w(a) = M_PI / (tm.hi(a) - tm.lo(a));
                const double th = w(a) * (t(a) - tm.lo(a));
                s(a) = std::sin(th);
                c(a) = std::cos(th);
            }
            for (Eigen::Index a = 0; a < ax; ++a) {
                double v = tm.coeff * w(a) * c(a);
                for (Eigen::Index m = 0; m < ax; ++m) {
                    if (m != a) v *= s(m);
                }
                g(a) += v;
            }
            return;
        }
        }
    }

    static void term_hessian(const Term& tm, const Eigen::VectorXd& t, Eigen::MatrixXd& h) {
        const int n = static_cast<int>(t.size()) / 2;
        switch (tm.kind) {
        case Term::Kind::Constant:
        case Term::Kind::ReLinear:
            return;
        case Term::Kind::NormSq:
            h.diagonal().array() += 2.0 * tm.coeff;
            return;
        case Term::Kind::QuarticAbs: {
            const int xa = tm.axis, ya = n + tm.axis;
            const double x = t(xa), y = t(ya);
            h(xa, xa) += tm.coeff * (12.0 * x * x + 4.0 * y * y);
            h(ya, ya) += tm.coeff * (4.0 * x * x + 12.0 * y * y);
            h(xa, ya) += tm.coeff * 8.0 * x * y;
            h(ya, xa) += tm.coeff * 8.0 * x * y;
            return;
        }
        case Term::Kind::ReZSquared:
            h(tm.axis, tm.axis) += 2.0 * tm.coeff;
            h(n + tm.axis, n + tm.axis) -= 2.0 * tm.coeff;
            return;
        case Term::Kind::SinBump: {
            const Eigen::Index ax = t.size();
            Eigen::VectorXd s(ax), c(ax), w(ax);
            for (Eigen::Index a = 0; a < ax; ++a) {
                w(a) = M_PI / (tm.hi(a) - tm.lo(a));
                const double th = w(a) * (t(a) - tm.lo(a));
                s(a) = std::sin(th);
                c(a) = std::cos(th);
            }
            double full = tm.coeff;
            for (Eigen::Index a = 0; a < ax; ++a) full *= s(a);
            for (Eigen::Index a = 0; a < ax; ++a) {
                h(a, a) += -w(a) * w(a) * full;
                for (Eigen::Index b = a + 1; b < ax; ++b) {
                    double v = tm.coeff * w(a) * c(a) * w(b) * c(b);
                    for (Eigen::Index m = 0; m < ax; ++m) {
                        if (m != a && m != b) v *= s(m);
                    }
                    h(a, b) += v;
                    h(b, a) += v;
                }
            }
            return;
        }
        }
    }

    std::vector<Term> terms_;
};

/// Scalar coefficient field: constant, affine, or exponential of an affine
/// form in the real coordinates.
class ScalarField {
public:
    enum class Kind { Constant, Affine, ExpAffine };

    [[nodiscard]] static ScalarField constant(double v) {
        ScalarField f;
        f.kind_ = Kind::Constant;
        f.const_ = v;
        return f;
    }

    [[nodiscard]] static ScalarField affine(double c0, Eigen::VectorXd coeffs) {
        ScalarField f;
        f.kind_ = Kind::Affine;
        f.const_ = c0;
        f.coeffs_ = std::move(coeffs);
        return f;
    }

    [[nodiscard]] static ScalarField exp_affine(double scale, double c0, Eigen::VectorXd coeffs) {
        ScalarField f;
        f.kind_ = Kind::ExpAffine;
        f.scale_ = scale;
        f.const_ = c0;
        f.coeffs_ = std::move(coeffs);
        return f;
    }

    [[nodiscard]] double value(const Eigen::VectorXd& t) const {
        switch (kind_) {
        case Kind::Constant:
            return const_;
        case Kind::Affine:
            return const_ + coeffs_.dot(t);
        case Kind::ExpAffine:
            return scale_ * std::exp(const_ + coeffs_.dot(t));
        }
        return 0.0;
    }

    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_ = Kind::Constant;
    double const_ = 0.0;
    double scale_ = 1.0;
    Eigen::VectorXd coeffs_;
};

} // namespace hmix::analytic
