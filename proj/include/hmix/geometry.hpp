#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmix/common.hpp"
#include "hmix/spectral.hpp"

namespace hmix::geom {

/// Uniform tensor grid over a box in C^n viewed as R^{2n}. Axis order is
/// x^1..x^n then y^1..y^n; multi-indices are flattened row-major with the
/// last axis fastest. Boundary points are the outermost layer of each axis.
struct GridSpec {
    int n = 0;               // complex dimension
    Eigen::VectorXd lo, hi;  // size 2n
    std::vector<int> shape;  // points per axis, size 2n
    Eigen::VectorXd h;       // spacing per axis

    [[nodiscard]] static GridSpec make(int n, Eigen::VectorXd lo, Eigen::VectorXd hi,
                                       std::vector<int> shape) {
        if (n < 1) throw std::invalid_argument("GridSpec: complex dimension must be >= 1");
        const int axes = 2 * n;
        if (lo.size() != axes || hi.size() != axes || static_cast<int>(shape.size()) != axes) {
            throw std::invalid_argument("GridSpec: lo/hi/shape must have 2n entries");
        }
        for (int a = 0; a < axes; ++a) {
            if (shape[a] < 5) {
                throw std::invalid_argument("GridSpec: need at least 5 points per axis");
            }
            if (!(hi(a) > lo(a))) {
                throw std::invalid_argument("GridSpec: need hi > lo on every axis");
            }
        }
        GridSpec g;
        g.n = n;
        g.lo = std::move(lo);
        g.hi = std::move(hi);
        g.shape = std::move(shape);
        g.h.resize(axes);
        for (int a = 0; a < axes; ++a) {
            g.h(a) = (g.hi(a) - g.lo(a)) / static_cast<double>(g.shape[a] - 1);
        }
        return g;
    }

    [[nodiscard]] int axes() const { return 2 * n; }

    [[nodiscard]] std::size_t total_points() const {
        std::size_t p = 1;
        for (int s : shape) p *= static_cast<std::size_t>(s);
        return p;
    }

    [[nodiscard]] std::size_t interior_points() const {
        std::size_t p = 1;
        for (int s : shape) p *= static_cast<std::size_t>(s - 2);
        return p;
    }

    [[nodiscard]] std::size_t flat(const std::vector<int>& mi) const {
        std::size_t f = 0;
        for (int a = 0; a < axes(); ++a) {
            f = f * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(mi[a]);
        }
        return f;
    }

    void unflat(std::size_t f, std::vector<int>& mi) const {
        mi.resize(axes());
        for (int a = axes() - 1; a >= 0; --a) {
            mi[a] = static_cast<int>(f % static_cast<std::size_t>(shape[a]));
            f /= static_cast<std::size_t>(shape[a]);
        }
    }

    [[nodiscard]] bool is_boundary(const std::vector<int>& mi) const {
        for (int a = 0; a < axes(); ++a) {
            if (mi[a] == 0 || mi[a] == shape[a] - 1) return true;
        }
        return false;
    }

    /// Linear index among interior points (all axes in [1, shape-2]).
    [[nodiscard]] std::size_t interior_flat(const std::vector<int>& mi) const {
        std::size_t f = 0;
        for (int a = 0; a < axes(); ++a) {
            f = f * static_cast<std::size_t>(shape[a] - 2) + static_cast<std::size_t>(mi[a] - 1);
        }
        return f;
    }

    [[nodiscard]] Eigen::VectorXd coords(const std::vector<int>& mi) const {
        Eigen::VectorXd x(axes());
        for (int a = 0; a < axes(); ++a) {
            x(a) = lo(a) + h(a) * static_cast<double>(mi[a]);
        }
        return x;
    }

    [[nodiscard]] double max_h() const { return h.maxCoeff(); }

    [[nodiscard]] bool same_layout(const GridSpec& o) const {
        return n == o.n && shape == o.shape && lo == o.lo && hi == o.hi;
    }

    /// Visits every interior point in flat order: fn(interior_index, multi_index).
    template <typename Fn>
    void for_each_interior(Fn&& fn) const {
        std::vector<int> mi(axes(), 1);
        const std::size_t count = interior_points();
        for (std::size_t ii = 0; ii < count; ++ii) {
            fn(ii, mi);
            for (int a = axes() - 1; a >= 0; --a) {
                if (++mi[a] <= shape[a] - 2) break;
                mi[a] = 1;
            }
        }
    }
};

/// Real scalar function sampled on the full grid (boundary layer included).
struct GridFunction {
    GridSpec grid;
    std::vector<double> values; // indexed by GridSpec::flat

    [[nodiscard]] static GridFunction zeros(const GridSpec& g) {
        GridFunction f;
        f.grid = g;
        f.values.assign(g.total_points(), 0.0);
        return f;
    }

    [[nodiscard]] static GridFunction sampled(const GridSpec& g,
                                              const std::function<double(const Eigen::VectorXd&)>& fn) {
        GridFunction f = zeros(g);
        std::vector<int> mi(g.axes(), 0);
        for (std::size_t p = 0; p < f.values.size(); ++p) {
            g.unflat(p, mi);
            f.values[p] = fn(g.coords(mi));
        }
        return f;
    }

    [[nodiscard]] double max_abs_diff(const GridFunction& o) const {
        double m = 0.0;
        for (std::size_t p = 0; p < values.size(); ++p) {
            m = std::max(m, std::abs(values[p] - o.values[p]));
        }
        return m;
    }
};

/// One Hermitian matrix per interior grid point.
struct HermitianField {
    GridSpec grid;
    std::vector<spectral::HermitianMatrix> cells; // indexed by interior_flat

    [[nodiscard]] static HermitianField zeros(const GridSpec& g) {
        HermitianField f;
        f.grid = g;
        f.cells.assign(g.interior_points(),
                       spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(g.n, g.n)));
        return f;
    }

    [[nodiscard]] static HermitianField constant(const GridSpec& g,
                                                 const spectral::HermitianMatrix& m) {
        if (m.dim() != g.n) throw std::invalid_argument("HermitianField: dimension mismatch");
        HermitianField f;
        f.grid = g;
        f.cells.assign(g.interior_points(), m);
        return f;
    }

    [[nodiscard]] const spectral::HermitianMatrix& at(std::size_t interior_idx) const {
        return cells[interior_idx];
    }
};

namespace detail {

/// Second-order central stencils evaluated from raw samples.
struct StencilEval {
    const GridFunction& u;
    std::vector<int> mi; // scratch multi-index

    explicit StencilEval(const GridFunction& f) : u(f), mi(f.grid.axes(), 0) {}

    [[nodiscard]] double value(const std::vector<int>& at) { return u.values[u.grid.flat(at)]; }

    /// (u(+e_a) - 2u + u(-e_a)) / h_a^2
    [[nodiscard]] double second_pure(const std::vector<int>& at, int a) {
        mi = at;
        mi[a] = at[a] + 1;
        const double up = u.values[u.grid.flat(mi)];
        mi[a] = at[a] - 1;
        const double dn = u.values[u.grid.flat(mi)];
        const double c = u.values[u.grid.flat(at)];
        return (up - 2.0 * c + dn) / (u.grid.h(a) * u.grid.h(a));
    }

    /// 4-point cross difference on distinct axes a, b.
    [[nodiscard]] double second_cross(const std::vector<int>& at, int a, int b) {
        mi = at;
        mi[a] = at[a] + 1;
        mi[b] = at[b] + 1;
        const double pp = u.values[u.grid.flat(mi)];
        mi[b] = at[b] - 1;
        const double pm = u.values[u.grid.flat(mi)];
        mi[a] = at[a] - 1;
        const double mm = u.values[u.grid.flat(mi)];
        mi[b] = at[b] + 1;
        const double mp = u.values[u.grid.flat(mi)];
        return (pp - pm - mp + mm) / (4.0 * u.grid.h(a) * u.grid.h(b));
    }

    /// (u(+e_a) - u(-e_a)) / (2 h_a)
    [[nodiscard]] double first_central(const std::vector<int>& at, int a) {
        mi = at;
        mi[a] = at[a] + 1;
        const double up = u.values[u.grid.flat(mi)];
        mi[a] = at[a] - 1;
        const double dn = u.values[u.grid.flat(mi)];
        return (up - dn) / (2.0 * u.grid.h(a));
    }
};

} // namespace detail

/// Discrete complex Hessian u_{i jbar} at every interior point:
///   u_{i jbar} = 1/4 [ (u_{x_i x_j} + u_{y_i y_j}) + i (u_{x_i y_j} - u_{y_i x_j}) ],
/// pure second derivatives by the 3-point stencil, mixed by the 4-point
/// cross stencil. Hermitian by construction (and re-symmetrized).
[[nodiscard]] inline HermitianField complex_hessian(const GridFunction& u) {
    const GridSpec& g = u.grid;
    const int n = g.n;
    HermitianField out;
    out.grid = g;
    out.cells.resize(g.interior_points());

    detail::StencilEval st(u);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        Eigen::MatrixXcd m(n, n);
        for (int i = 0; i < n; ++i) {
            const int xi = i;
            const int yi = n + i;
            m(i, i) = 0.25 * (st.second_pure(mi, xi) + st.second_pure(mi, yi));
            for (int j = i + 1; j < n; ++j) {
                const int xj = j;
                const int yj = n + j;
                const double re =
                    0.25 * (st.second_cross(mi, xi, xj) + st.second_cross(mi, yi, yj));
                const double im =
                    0.25 * (st.second_cross(mi, xi, yj) - st.second_cross(mi, yi, xj));
                m(i, j) = std::complex<double>(re, im);
                m(j, i) = std::complex<double>(re, -im);
            }
        }
        out.cells[ii] = spectral::HermitianMatrix::symmetrized(m);
    });
    return out;
}

/// chi_u = chi_0 + complex Hessian of u.
[[nodiscard]] inline HermitianField chi_u(const GridFunction& u, const HermitianField& chi0) {
    if (!u.grid.same_layout(chi0.grid)) {
        throw std::invalid_argument("chi_u: grid mismatch");
    }
    HermitianField h = complex_hessian(u);
    for (std::size_t i = 0; i < h.cells.size(); ++i) {
        h.cells[i] = h.cells[i] + chi0.cells[i];
    }
    return h;
}

/// sup over interior points of the Euclidean norm of the central-difference
/// gradient in R^{2n}.
[[nodiscard]] inline double gradient_sup(const GridFunction& u) {
    const GridSpec& g = u.grid;
    detail::StencilEval st(u);
    double best = 0.0;
    g.for_each_interior([&](std::size_t, const std::vector<int>& mi) {
        double s = 0.0;
        for (int a = 0; a < g.axes(); ++a) {
            const double d = st.first_central(mi, a);
            s += d * d;
        }
        best = std::max(best, s);
    });
    return std::sqrt(best);
}

/// Sparse discretization of v -> sum_{ij} G^{i jbar} v_{i jbar} for real v,
/// using the same stencils as complex_hessian:
///   L v = sum_i  Re P_ii / 4 (D_{x_i x_i} + D_{y_i y_i}) v
///       + sum_{i<j} Re P_ij / 2 (D_{x_i x_j} + D_{y_i y_j}) v
///       + sum_{i<j} Im P_ij / 2 (D_{x_i y_j} - D_{y_i x_j}) v,
/// so that L v equals the directional derivative of the discrete operator.
/// Rows for boundary points are identity (Dirichlet). The coefficient field
/// must be positive definite at every point.
[[nodiscard]] inline Eigen::SparseMatrix<double> linearized_stencil(const HermitianField& coeff) {
    const GridSpec& g = coeff.grid;
    const int n = g.n;
    const std::size_t total = g.total_points();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(total + g.interior_points() * (1 + 4 * g.axes() * g.axes()));

    // boundary rows: identity
    {
        std::vector<int> mi(g.axes(), 0);
        for (std::size_t p = 0; p < total; ++p) {
            g.unflat(p, mi);
            if (g.is_boundary(mi)) {
                trips.emplace_back(static_cast<int>(p), static_cast<int>(p), 1.0);
            }
        }
    }

    std::vector<int> mj(g.axes(), 0);
    const auto add_pure = [&](std::size_t row, const std::vector<int>& mi, int a, double w) {
        const double inv_h2 = 1.0 / (g.h(a) * g.h(a));
        mj = mi;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)),
                           -2.0 * w * inv_h2);
        mj[a] = mi[a] + 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), w * inv_h2);
        mj[a] = mi[a] - 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), w * inv_h2);
    };
    const auto add_cross = [&](std::size_t row, const std::vector<int>& mi, int a, int b,
                               double w) {
        const double inv = w / (4.0 * g.h(a) * g.h(b));
        mj = mi;
        mj[a] = mi[a] + 1;
        mj[b] = mi[b] + 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), inv);
        mj[b] = mi[b] - 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), -inv);
        mj[a] = mi[a] - 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), inv);
        mj[b] = mi[b] + 1;
        trips.emplace_back(static_cast<int>(row), static_cast<int>(g.flat(mj)), -inv);
    };

    std::vector<std::size_t> bad_points;
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        const Eigen::MatrixXcd& p = coeff.at(ii).matrix();
        // positive definiteness gate; diagonal positivity is necessary and
        // checked first as the cheap assembly-time assertion
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            if (!(p(i, i).real() > 0.0)) ok = false;
        }
        if (ok && n > 1) {
            const Eigen::LLT<Eigen::MatrixXcd> llt(p);
            ok = (llt.info() == Eigen::Success);
        }
        if (!ok) {
            bad_points.push_back(g.flat(mi));
            return;
        }

        const std::size_t row = g.flat(mi);
        for (int i = 0; i < n; ++i) {
            const double w = 0.25 * p(i, i).real();
            add_pure(row, mi, i, w);
            add_pure(row, mi, n + i, w);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double re = 0.5 * p(i, j).real();
                const double im = 0.5 * p(i, j).imag();
                if (re != 0.0) {
                    add_cross(row, mi, i, j, re);
                    add_cross(row, mi, n + i, n + j, re);
                }
                if (im != 0.0) {
                    add_cross(row, mi, i, n + j, im);
                    add_cross(row, mi, n + i, j, -im);
                }
            }
        }
    });
    if (!bad_points.empty()) {
        throw admissibility_error("linearized_stencil: coefficient matrix not positive "
                                  "definite at " + std::to_string(bad_points.size()) +
                                  " point(s)", bad_points);
    }

    Eigen::SparseMatrix<double> m(static_cast<int>(total), static_cast<int>(total));
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

} // namespace hmix::geom
