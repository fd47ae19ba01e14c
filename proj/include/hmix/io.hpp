#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmix/analytic.hpp"
#include "hmix/common.hpp"
#include "hmix/problems.hpp"
#include "hmix/solver.hpp"

namespace hmix::io {

using nlohmann::json;

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// field dumps: flat little-endian float64 in index order plus a JSON sidecar
// describing the grid
// ---------------------------------------------------------------------------

inline void dump_field(const geom::GridFunction& f, const std::string& path_base,
                       const std::string& description = "") {
    static_assert(sizeof(double) == 8);
    {
        std::ofstream out(path_base + ".f64", std::ios::binary);
        if (!out) throw std::runtime_error("dump_field: cannot open " + path_base + ".f64");
        out.write(reinterpret_cast<const char*>(f.values.data()),
                  static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    }
    json side;
    side["n"] = f.grid.n;
    side["lo"] = std::vector<double>(f.grid.lo.data(), f.grid.lo.data() + f.grid.lo.size());
    side["hi"] = std::vector<double>(f.grid.hi.data(), f.grid.hi.data() + f.grid.hi.size());
    side["shape"] = f.grid.shape;
    side["count"] = f.values.size();
    side["order"] = "row-major, axes x_1..x_n then y_1..y_n, last axis fastest";
    side["dtype"] = "float64-le";
    if (!description.empty()) side["description"] = description;
    std::ofstream out(path_base + ".json");
    out << side.dump(2) << "\n";
}

[[nodiscard]] inline geom::GridFunction load_field(const std::string& path_base) {
    std::ifstream side_in(path_base + ".json");
    if (!side_in) throw std::runtime_error("load_field: cannot open " + path_base + ".json");
    json side = json::parse(side_in);
    const int n = side.at("n").get<int>();
    const std::vector<double> lo = side.at("lo").get<std::vector<double>>();
    const std::vector<double> hi = side.at("hi").get<std::vector<double>>();
    const std::vector<int> shape = side.at("shape").get<std::vector<int>>();
    geom::GridSpec g = geom::GridSpec::make(
        n, Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
        Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())), shape);
    geom::GridFunction f = geom::GridFunction::zeros(g);
    std::ifstream in(path_base + ".f64", std::ios::binary);
    if (!in) throw std::runtime_error("load_field: cannot open " + path_base + ".f64");
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != f.values.size() * sizeof(double)) {
        throw std::runtime_error("load_field: truncated data file");
    }
    return f;
}

/// One-dimensional slice through `base_mi` along `axis`, as CSV (coord,value).
inline void export_csv_slice(const geom::GridFunction& f, int axis, std::vector<int> base_mi,
                             const std::string& path) {
    const geom::GridSpec& g = f.grid;
    if (axis < 0 || axis >= g.axes()) throw std::invalid_argument("export_csv_slice: bad axis");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_csv_slice: cannot open " + path);
    out << "coord,value\n";
    char buf[64];
    for (int i = 0; i < g.shape[axis]; ++i) {
        base_mi[axis] = i;
        const double x = g.lo(axis) + g.h(axis) * i;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x, f.values[g.flat(base_mi)]);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// problem configuration
// ---------------------------------------------------------------------------

/// Parses an analytic potential descriptor. Known kinds: zero, constant,
/// norm_sq, quartic_abs, re_linear, re_z_squared, sin_bump, sum.
[[nodiscard]] inline analytic::AnalyticFunction parse_potential(const json& j,
                                                                const Eigen::VectorXd& lo,
                                                                const Eigen::VectorXd& hi) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zero") return analytic::AnalyticFunction::zero();
    if (kind == "constant") return analytic::AnalyticFunction::constant(j.at("value").get<double>());
    if (kind == "norm_sq") return analytic::AnalyticFunction::norm_sq(j.at("coeff").get<double>());
    if (kind == "quartic_abs") {
        return analytic::AnalyticFunction::quartic_abs(j.at("coeff").get<double>(),
                                                       j.at("axis").get<int>());
    }
    if (kind == "re_linear") {
        const auto v = j.at("coeffs").get<std::vector<double>>();
        return analytic::AnalyticFunction::re_linear(
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (kind == "re_z_squared") {
        return analytic::AnalyticFunction::re_z_squared(j.at("coeff").get<double>(),
                                                        j.at("axis").get<int>());
    }
    if (kind == "sin_bump") {
        return analytic::AnalyticFunction::sin_bump(j.at("coeff").get<double>(), lo, hi);
    }
    if (kind == "sum") {
        analytic::AnalyticFunction f;
        for (const json& t : j.at("terms")) f = f.plus(parse_potential(t, lo, hi));
        return f;
    }
    throw config_error("unknown potential kind '" + kind + "'");
}

/// Parses a scalar coefficient descriptor: constant, affine, exp_affine.
[[nodiscard]] inline analytic::ScalarField parse_scalar(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") return analytic::ScalarField::constant(j.at("value").get<double>());
    if (kind == "affine") {
        const auto v = j.at("coeffs").get<std::vector<double>>();
        return analytic::ScalarField::affine(
            j.at("const").get<double>(),
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (kind == "exp_affine") {
        const auto v = j.at("coeffs").get<std::vector<double>>();
        return analytic::ScalarField::exp_affine(
            j.at("scale").get<double>(), j.at("const").get<double>(),
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    throw config_error("unknown scalar field kind '" + kind + "'");
}

struct ProblemConfig {
    int n = 0;
    int k = 0;
    Eigen::VectorXd lo, hi;
    std::vector<int> shape;
    json chi0;
    std::vector<json> alpha;             // descriptors
    std::optional<json> ustar;           // manufactured when present
    std::optional<json> phi;             // required when ustar absent
    std::optional<json> usub;            // required when ustar absent
    double deflation_c = 0.0;
    std::optional<json> deflation_bump;
    solver::SolverConfig solver;
    json raw;
};

[[nodiscard]] inline ProblemConfig parse_config(const json& j) {
    ProblemConfig c;
    c.raw = j;
    try {
        c.n = j.at("n").get<int>();
        c.k = j.at("k").get<int>();
        const auto lo = j.at("box").at("lo").get<std::vector<double>>();
        const auto hi = j.at("box").at("hi").get<std::vector<double>>();
        c.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
        c.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
        c.shape = j.at("shape").get<std::vector<int>>();
        c.chi0 = j.at("chi0");
        for (const json& a : j.at("alpha")) c.alpha.push_back(a);
        if (j.contains("ustar") && !j.at("ustar").is_null()) c.ustar = j.at("ustar");
        if (j.contains("phi") && !j.at("phi").is_null()) c.phi = j.at("phi");
        if (j.contains("usub") && !j.at("usub").is_null()) c.usub = j.at("usub");
        if (j.contains("deflation") && !j.at("deflation").is_null()) {
            c.deflation_c = j.at("deflation").at("c").get<double>();
            if (j.at("deflation").contains("bump")) c.deflation_bump = j.at("deflation").at("bump");
        }
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            if (s.contains("newton_tol")) c.solver.newton_tol = s.at("newton_tol").get<double>();
            if (s.contains("max_newton")) c.solver.max_newton = s.at("max_newton").get<int>();
            if (s.contains("t_step0")) c.solver.t_step0 = s.at("t_step0").get<double>();
            if (s.contains("t_min_step")) c.solver.t_min_step = s.at("t_min_step").get<double>();
            if (s.contains("linear_tol")) c.solver.linear_tol = s.at("linear_tol").get<double>();
            if (s.contains("cone_margin")) c.solver.cone_margin = s.at("cone_margin").get<double>();
            if (s.contains("min_step")) c.solver.min_step = s.at("min_step").get<double>();
            if (s.contains("direct_threshold")) {
                c.solver.direct_threshold = s.at("direct_threshold").get<std::size_t>();
            }
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("config schema error: ") + e.what());
    }
    if (c.n < 1) throw config_error("config: n must be >= 1");
    if (c.k < 1 || c.k > c.n) throw config_error("config: need 1 <= k <= n");
    const int axes = 2 * c.n;
    if (c.lo.size() != axes || c.hi.size() != axes || static_cast<int>(c.shape.size()) != axes) {
        throw config_error("config: box/shape must have 2n entries");
    }
    if (c.ustar) {
        if (static_cast<int>(c.alpha.size()) != c.k - 1) {
            throw config_error("config: manufactured problems take k-1 alpha fields "
                               "(alpha_{k-1} comes from the manufactured right-hand side)");
        }
    } else {
        if (static_cast<int>(c.alpha.size()) != c.k) {
            throw config_error("config: direct problems take k alpha fields");
        }
        if (!c.phi || !c.usub) {
            throw config_error("config: direct problems require phi and usub descriptors");
        }
    }
    c.solver.validate();
    return c;
}

[[nodiscard]] inline ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

/// Scales every axis resolution by `grid_scale`: shape' = round((shape-1)*s)+1.
[[nodiscard]] inline std::vector<int> scaled_shape(const std::vector<int>& shape, double s) {
    std::vector<int> out(shape.size());
    for (std::size_t a = 0; a < shape.size(); ++a) {
        out[a] = static_cast<int>(std::lround((shape[a] - 1) * s)) + 1;
    }
    return out;
}

struct BuiltProblem {
    problems::ProblemSpec spec;
    std::optional<problems::ManufacturedProblem> manufactured;
};

[[nodiscard]] inline geom::HermitianField build_chi0(const json& j, const geom::GridSpec& g) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        return geom::HermitianField::constant(
            g, spectral::HermitianMatrix::symmetrized(Eigen::MatrixXcd::Zero(g.n, g.n)));
    }
    if (kind == "scaled_identity") {
        const double s = j.at("scale").get<double>();
        return geom::HermitianField::constant(g, spectral::HermitianMatrix::identity(g.n).scaled(s));
    }
    if (kind == "constant_matrix") {
        const auto rows = j.at("entries").get<std::vector<std::vector<std::vector<double>>>>();
        Eigen::MatrixXcd m(g.n, g.n);
        if (static_cast<int>(rows.size()) != g.n) throw config_error("chi0: bad entry count");
        for (int i = 0; i < g.n; ++i) {
            if (static_cast<int>(rows[i].size()) != g.n) throw config_error("chi0: bad entry count");
            for (int jj = 0; jj < g.n; ++jj) {
                if (rows[i][jj].size() != 2) throw config_error("chi0: entries are [re, im] pairs");
                m(i, jj) = std::complex<double>(rows[i][jj][0], rows[i][jj][1]);
            }
        }
        return geom::HermitianField::constant(g, spectral::HermitianMatrix::checked(m, 1e-9));
    }
    throw config_error("unknown chi0 kind '" + kind + "'");
}

/// Samples a scalar descriptor over the interior points.
[[nodiscard]] inline Eigen::VectorXd sample_interior(const analytic::ScalarField& f,
                                                     const geom::GridSpec& g) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.interior_points()));
    g.for_each_interior([&](std::size_t ii, const std::vector<int>& mi) {
        v(static_cast<Eigen::Index>(ii)) = f.value(g.coords(mi));
    });
    return v;
}

[[nodiscard]] inline BuiltProblem build_problem(const ProblemConfig& c, double grid_scale = 1.0) {
    geom::GridSpec grid = geom::GridSpec::make(c.n, c.lo, c.hi, scaled_shape(c.shape, grid_scale));
    geom::HermitianField chi0 = build_chi0(c.chi0, grid);

    if (c.ustar) {
        // manufactured path: normalized low-order coefficients, rhs from ustar
        std::vector<Eigen::VectorXd> beta_low;
        const double cnk = binomial(c.n, c.k);
        for (int l = 0; l < c.k - 1; ++l) {
            const Eigen::VectorXd alpha_l = sample_interior(parse_scalar(c.alpha[l]), grid);
            beta_low.push_back(alpha_l * (cnk / binomial(c.n, l)));
        }
        const analytic::AnalyticFunction ustar = parse_potential(*c.ustar, c.lo, c.hi);
        problems::ManufacturedProblem mp =
            problems::manufacture(grid, c.k, chi0, beta_low, ustar);
        BuiltProblem out{mp.spec, std::move(mp)};
        if (c.deflation_c > 0.0) {
            const analytic::AnalyticFunction bump =
                c.deflation_bump ? parse_potential(*c.deflation_bump, c.lo, c.hi)
                                 : analytic::AnalyticFunction::sin_bump(1.0, c.lo, c.hi);
            out.spec = problems::deflate_subsolution(*out.manufactured, c.deflation_c, bump);
        }
        return out;
    }

    // direct path: all k alpha fields, usub and phi from descriptors; the
    // boundary layer of usub is copied from phi so the Dirichlet data is exact
    std::vector<Eigen::VectorXd> alpha;
    for (int l = 0; l < c.k; ++l) {
        alpha.push_back(sample_interior(parse_scalar(c.alpha[l]), grid));
    }
    const analytic::AnalyticFunction phi_fn = parse_potential(*c.phi, c.lo, c.hi);
    const analytic::AnalyticFunction usub_fn = parse_potential(*c.usub, c.lo, c.hi);
    geom::GridFunction phi = phi_fn.sample(grid);
    geom::GridFunction usub = usub_fn.sample(grid);
    {
        std::vector<int> mi(grid.axes(), 0);
        double worst = 0.0;
        for (std::size_t p = 0; p < usub.values.size(); ++p) {
            grid.unflat(p, mi);
            if (grid.is_boundary(mi)) {
                worst = std::max(worst, std::abs(usub.values[p] - phi.values[p]));
                usub.values[p] = phi.values[p];
            }
        }
        if (worst > 1e-9) {
            throw config_error("config: usub and phi disagree on the boundary (max " +
                               std::to_string(worst) + ")");
        }
    }
    return BuiltProblem{problems::ProblemSpec::create(grid, c.k, chi0, std::move(alpha),
                                                      std::move(phi), std::move(usub)),
                        std::nullopt};
}

// ---------------------------------------------------------------------------
// reports and manifests
// ---------------------------------------------------------------------------

[[nodiscard]] inline json solve_report_json(const solver::SolveReport& r,
                                            const solver::SolverConfig& cfg, const json& config_echo) {
    json j;
    j["status"] = r.status == solver::SolveStatus::Converged ? "converged"
                  : r.status == solver::SolveStatus::HomotopyFailure ? "homotopy_failure"
                                                                     : "linear_failure";
    j["final_residual"] = r.final_residual;
    j["total_newton_iters"] = r.total_newton_iters;
    j["wall_seconds"] = r.wall_seconds;
    j["audits"] = {{"cone_invariant_ok", r.cone_invariant_ok},
                   {"subsolution_below_ok", r.subsolution_below_ok},
                   {"subsolution_worst_margin", r.subsolution_worst_margin},
                   {"residual_monotone_ok", r.residual_monotone_ok}};
    if (!r.failure_detail.empty()) j["failure_detail"] = r.failure_detail;
    json steps = json::array();
    for (const auto& rec : r.records) {
        steps.push_back({{"t", rec.t},
                         {"newton_iters", rec.newton_iters},
                         {"residual", rec.residual},
                         {"step", rec.step}});
    }
    j["t_steps"] = steps;
    j["config"] = {{"newton_tol", cfg.newton_tol},
                   {"max_newton", cfg.max_newton},
                   {"t_step0", cfg.t_step0},
                   {"t_min_step", cfg.t_min_step},
                   {"linear_tol", cfg.linear_tol},
                   {"cone_margin", cfg.cone_margin},
                   {"direct_threshold", cfg.direct_threshold}};
    j["problem"] = config_echo;
    return j;
}

[[nodiscard]] inline std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_hash_hex: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
    }
    return hex64(h);
}

struct Artifact {
    std::string path;     // relative to the output directory
    std::uint64_t bytes = 0;
    std::string hash;
};

[[nodiscard]] inline json manifest_json(const std::string& command, const std::string& config_path,
                                        const std::string& out_dir, std::uint64_t seed,
                                        const std::string& started, const std::string& finished,
                                        const std::vector<Artifact>& artifacts) {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    j["output_dir"] = out_dir;
    j["seed"] = seed;
    j["timestamps"] = {{"started", started}, {"finished", finished}};
    json arts = json::array();
    for (const auto& a : artifacts) {
        arts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"hash", a.hash}});
    }
    j["artifacts"] = arts;
    return j;
}

[[nodiscard]] inline Artifact make_artifact(const std::filesystem::path& out_dir,
                                            const std::string& rel) {
    const std::filesystem::path p = out_dir / rel;
    Artifact a;
    a.path = rel;
    a.bytes = std::filesystem::file_size(p);
    a.hash = file_hash_hex(p.string());
    return a;
}

} // namespace hmix::io
