#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hmix/io.hpp"
#include "hmix/suites.hpp"

namespace hmix::cli {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 42;
    double grid_scale = 1.0;
    int max_threads = 0;      // 0 = library default
    std::string suite_name;   // for `suite`
};

namespace detail {

inline std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

inline void write_json(const fs::path& p, const io::json& j) {
    std::ofstream out(p);
    out << j.dump(2) << "\n";
}

inline void write_error(const fs::path& out_dir, const std::string& kind,
                        const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    write_json(out_dir / "error.json", io::json{{"kind", kind}, {"message", message}});
    log_msg(LogLevel::error, kind + ": " + message);
    std::fprintf(stderr, "hmix: %s: %s\n", kind.c_str(), message.c_str());
}

} // namespace detail

/// solve: run the continuity method on the configured problem, write the
/// solution field, run report and manifest. Exit 0 on convergence at t = 1,
/// 2 on homotopy/linear failure, 1 on configuration errors.
inline int run_solve(const Options& opt) {
    const std::string started = detail::iso_now();
    io::ProblemConfig cfg;
    std::optional<io::BuiltProblem> built;
    try {
        cfg = io::load_config(opt.config);
        built = io::build_problem(cfg, opt.grid_scale);
    } catch (const std::exception& e) {
        detail::write_error(opt.out, "config", e.what());
        return 1;
    }

    fs::create_directories(opt.out);
    auto [u, rep] = solver::continuity_solve(built->spec, cfg.solver);

    io::dump_field(u, (fs::path(opt.out) / "solution").string(), "solution field");
    if (built->manufactured) {
        io::dump_field(built->manufactured->ustar, (fs::path(opt.out) / "ustar").string(),
                       "manufactured exact solution samples");
        io::json extra;
        extra["sup_error_vs_ustar"] = u.max_abs_diff(built->manufactured->ustar);
        detail::write_json(fs::path(opt.out) / "manufactured.json", extra);
    }
    detail::write_json(fs::path(opt.out) / "report.json",
                       io::solve_report_json(rep, cfg.solver, cfg.raw));

    std::vector<io::Artifact> artifacts;
    artifacts.push_back(io::make_artifact(opt.out, "solution.f64"));
    artifacts.push_back(io::make_artifact(opt.out, "solution.json"));
    artifacts.push_back(io::make_artifact(opt.out, "report.json"));
    if (built->manufactured) {
        artifacts.push_back(io::make_artifact(opt.out, "ustar.f64"));
        artifacts.push_back(io::make_artifact(opt.out, "ustar.json"));
        artifacts.push_back(io::make_artifact(opt.out, "manufactured.json"));
    }
    detail::write_json(fs::path(opt.out) / "manifest.json",
                       io::manifest_json("solve", opt.config, opt.out, opt.seed, started,
                                         detail::iso_now(), artifacts));

    if (rep.status == solver::SolveStatus::Converged) {
        std::printf("solve: converged, final residual %.3e, %d Newton iterations\n",
                    rep.final_residual, rep.total_newton_iters);
        return 0;
    }
    detail::write_error(opt.out, "homotopy",
                        rep.failure_detail.empty() ? "solve did not reach t = 1"
                                                   : rep.failure_detail);
    return 2;
}

/// check: problem invariants plus the pointwise structural identities at the
/// subsolution. Prints margins; exit 1 with the first violation.
inline int run_check(const Options& opt) {
    io::ProblemConfig cfg;
    std::optional<io::BuiltProblem> built;
    try {
        cfg = io::load_config(opt.config);
        built = io::build_problem(cfg, opt.grid_scale);
    } catch (const std::exception& e) {
        detail::write_error(opt.out, "check", e.what());
        return 1;
    }
    const problems::ProblemSpec& spec = built->spec;
    const geom::GridSpec& g = spec.grid;

    // admissibility + subsolution inequality margins (construction already
    // verified them; recompute to report numbers)
    const geom::HermitianField chi = geom::chi_u(spec.usub, spec.chi0);
    double min_sigma_margin = std::numeric_limits<double>::infinity();
    double min_ineq_margin = std::numeric_limits<double>::infinity();
    double worst_euler = 0.0;
    double min_trace_margin = std::numeric_limits<double>::infinity();
    bool bounds_ok = true;
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        const spectral::EigenPair e = spectral::eig_hermitian(chi.at(ii));
        for (int j = 1; j <= spec.k - 1; ++j) {
            min_sigma_margin = std::min(min_sigma_margin, e.lambda.sigmas(j));
        }
        mixop::Coefficients c = spec.coef(ii);
        const double val = mixop::evaluate_sigmas(e.lambda.sigmas, c);
        min_ineq_margin = std::min(min_ineq_margin, val - c.beta);
        c.beta = val; // structural identities hold at the attained value
        const mixop::ConeBoundsReport br = mixop::cone_bounds_report(e.lambda.values, c);
        if (!br.ok) bounds_ok = false;
        worst_euler = std::max(worst_euler, std::abs(br.euler_lhs - br.euler_rhs));
        min_trace_margin = std::min(min_trace_margin, br.trace_sum - br.trace_lower_bound);
    });

    const geom::GridFunction v = problems::supersolution(spec, cfg.solver.linear_tol);
    double trace_resid = 0.0;
    const geom::HermitianField chi_v = geom::chi_u(v, spec.chi0);
    g.for_each_interior([&](std::size_t ii, const std::vector<int>&) {
        trace_resid = std::max(trace_resid, std::abs(chi_v.at(ii).trace_real()));
    });

    std::printf("check: admissibility min sigma margin  %.6e\n", min_sigma_margin);
    std::printf("check: subsolution inequality margin   %.6e\n", min_ineq_margin);
    std::printf("check: cone bounds (Euler worst abs)   %.6e, trace margin %.6e, ok=%s\n",
                worst_euler, min_trace_margin, bounds_ok ? "yes" : "no");
    std::printf("check: supersolution trace residual    %.6e\n", trace_resid);

    if (!(min_sigma_margin > 0.0)) {
        detail::write_error(opt.out, "check", "subsolution admissibility margin not positive");
        return 1;
    }
    if (min_ineq_margin < -1e-10) {
        detail::write_error(opt.out, "check", "subsolution inequality violated");
        return 1;
    }
    if (!bounds_ok) {
        detail::write_error(opt.out, "check", "cone bounds report failed at the subsolution");
        return 1;
    }
    if (trace_resid > 1e-8) {
        detail::write_error(opt.out, "check", "supersolution residual too large");
        return 1;
    }
    std::printf("check: ok\n");
    return 0;
}

/// suite: named property suite with a fixed seed; writes an OracleReport.
inline int run_suite(const Options& opt) {
    suites::SuiteResult res;
    if (opt.suite_name == "symfun") {
        res = suites::run_symfun_suite(opt.seed);
        // the Newton-MacLaurin family belongs to the same kernel suite
        const suites::SuiteResult nm = suites::run_newton_maclaurin_suite(opt.seed, 300);
        res.passed = res.passed && nm.passed;
        res.lines.insert(res.lines.end(), nm.lines.begin(), nm.lines.end());
        res.report.cases += nm.report.cases;
    } else if (opt.suite_name == "spectral") {
        res = suites::run_spectral_suite(opt.seed);
    } else if (opt.suite_name == "operator") {
        res = suites::run_operator_suite(opt.seed);
    } else if (opt.suite_name == "convergence") {
        res = suites::run_convergence_suite(opt.seed);
    } else {
        detail::write_error(opt.out, "suite", "unknown suite '" + opt.suite_name +
                                                  "' (symfun|spectral|operator|convergence)");
        return 1;
    }

    for (const std::string& line : res.lines) std::printf("%s: %s\n", res.name.c_str(), line.c_str());
    std::printf("%s: %s (%.2f s)\n", res.name.c_str(), res.passed ? "PASS" : "FAIL", res.seconds);

    fs::create_directories(opt.out);
    io::json j;
    j["suite"] = res.name;
    j["seed"] = opt.seed;
    j["passed"] = res.passed;
    j["max_abs_err"] = res.report.max_abs_err;
    j["max_rel_err"] = res.report.max_rel_err;
    j["cases"] = res.report.cases;
    j["failures"] = res.report.failures;
    j["lines"] = res.lines;
    j["seconds"] = res.seconds;
    detail::write_json(fs::path(opt.out) / ("suite_" + res.name + ".json"), j);
    return res.passed ? 0 : 1;
}

/// manufacture: validate a ustar-based config and write the expanded config
/// with the manufactured right-hand side statistics.
inline int run_manufacture(const Options& opt) {
    const std::string started = detail::iso_now();
    try {
        const io::ProblemConfig cfg = io::load_config(opt.config);
        if (!cfg.ustar) {
            detail::write_error(opt.out, "manufacture", "config has no ustar descriptor");
            return 1;
        }
        const io::BuiltProblem built = io::build_problem(cfg, opt.grid_scale);
        fs::create_directories(opt.out);

        io::json out_cfg = cfg.raw;
        out_cfg["manufactured"] = {
            {"beta_min", built.manufactured->beta_field.minCoeff()},
            {"beta_max", built.manufactured->beta_field.maxCoeff()},
            {"interior_points", built.spec.grid.interior_points()},
            {"verified", true}};
        detail::write_json(fs::path(opt.out) / "manufactured_config.json", out_cfg);

        std::vector<io::Artifact> artifacts{io::make_artifact(opt.out, "manufactured_config.json")};
        detail::write_json(fs::path(opt.out) / "manifest.json",
                           io::manifest_json("manufacture", opt.config, opt.out, opt.seed, started,
                                             detail::iso_now(), artifacts));
        std::printf("manufacture: ok, beta in [%.6g, %.6g]\n",
                    built.manufactured->beta_field.minCoeff(),
                    built.manufactured->beta_field.maxCoeff());
        return 0;
    } catch (const std::exception& e) {
        detail::write_error(opt.out, "manufacture", e.what());
        return 1;
    }
}

} // namespace hmix::cli
