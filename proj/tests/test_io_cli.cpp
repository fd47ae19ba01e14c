#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "hmix/cli.hpp"
#include "hmix/io.hpp"
#include "hmix/suites.hpp"

using namespace hmix;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(HMIX_SOURCE_DIR) + "/configs";

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("hmix_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

io::json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    return io::json::parse(in);
}

} // namespace

TEST_CASE("field dump and load round-trip bitwise", "[io]") {
    const auto rp = suites::make_reference_problem(5, true, 0.0);
    const fs::path dir = temp_dir("dump");
    io::dump_field(rp.manufactured.ustar, (dir / "f").string(), "test field");

    const geom::GridFunction back = io::load_field((dir / "f").string());
    REQUIRE(back.values.size() == rp.manufactured.ustar.values.size());
    CHECK(back.values == rp.manufactured.ustar.values);
    CHECK(back.grid.same_layout(rp.spec.grid));

    const io::json side = read_json(dir / "f.json");
    CHECK(side.at("n") == 2);
    CHECK(side.at("shape").get<std::vector<int>>() == std::vector<int>{5, 5, 5, 5});
    CHECK(side.at("count") == rp.manufactured.ustar.values.size());
}

TEST_CASE("csv slice export", "[io]") {
    const auto rp = suites::make_reference_problem(5, false, 0.0);
    const fs::path dir = temp_dir("csv");
    io::export_csv_slice(rp.manufactured.ustar, 0, {0, 2, 2, 2}, (dir / "slice.csv").string());

    std::ifstream in(dir / "slice.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "coord,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("config parsing and schema errors", "[io]") {
    CHECK_THROWS_AS(io::load_config(kConfigs + "/does_not_exist.json"), io::config_error);

    const io::ProblemConfig good = io::load_config(kConfigs + "/ci_quadratic.json");
    CHECK(good.n == 2);
    CHECK(good.k == 2);
    CHECK(good.shape == std::vector<int>{9, 9, 9, 9});
    CHECK(good.ustar.has_value());

    io::json j = good.raw;
    j.erase("shape");
    CHECK_THROWS_AS(io::parse_config(j), io::config_error);

    io::json j2 = good.raw;
    j2["k"] = 5; // k > n
    CHECK_THROWS_AS(io::parse_config(j2), io::config_error);

    io::json j3 = good.raw;
    j3["alpha"].push_back({{"kind", "constant"}, {"value", 1.0}}); // wrong count
    CHECK_THROWS_AS(io::parse_config(j3), io::config_error);

    io::json j4 = good.raw;
    j4["ustar"] = {{"kind", "no_such_form"}};
    CHECK_THROWS_AS(io::build_problem(io::parse_config(j4)), io::config_error);
}

TEST_CASE("grid scaling of configured shapes", "[io]") {
    CHECK(io::scaled_shape({9, 9, 9, 9}, 1.5) == std::vector<int>{13, 13, 13, 13});
    CHECK(io::scaled_shape({13, 13, 13, 13}, 4.0 / 3.0) == std::vector<int>{17, 17, 17, 17});
    CHECK(io::scaled_shape({9, 9, 9, 9}, 1.0) == std::vector<int>{9, 9, 9, 9});
}

TEST_CASE("solve command end to end with manifest hashes", "[cli]") {
    const fs::path out = temp_dir("solve");
    cli::Options opt;
    opt.config = kConfigs + "/ci_quadratic.json";
    opt.out = out.string();
    REQUIRE(cli::run_solve(opt) == 0);

    const io::json report = read_json(out / "report.json");
    CHECK(report.at("status") == "converged");
    CHECK(report.at("final_residual").get<double>() <= 1e-10);
    CHECK(report.at("audits").at("cone_invariant_ok").get<bool>());

    const io::json manifest = read_json(out / "manifest.json");
    for (const auto& a : manifest.at("artifacts")) {
        const fs::path p = out / a.at("path").get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == a.at("bytes").get<std::uint64_t>());
        CHECK(io::file_hash_hex(p.string()) == a.at("hash").get<std::string>());
    }

    // manufactured problems also dump the exact-solution samples
    const io::json extra = read_json(out / "manufactured.json");
    CHECK(extra.at("sup_error_vs_ustar").get<double>() <= 1e-9);
}

TEST_CASE("solve determinism: identical dumps and artifact lists", "[cli]") {
    const fs::path out1 = temp_dir("det1");
    const fs::path out2 = temp_dir("det2");
    cli::Options opt;
    opt.config = kConfigs + "/ci_quadratic.json";
    opt.out = out1.string();
    REQUIRE(cli::run_solve(opt) == 0);
    opt.out = out2.string();
    REQUIRE(cli::run_solve(opt) == 0);

    CHECK(slurp(out1 / "solution.f64") == slurp(out2 / "solution.f64"));

    // artifact lists agree except for the run report, whose contract includes
    // wall time
    const auto strip_report = [](const io::json& m) {
        io::json arts = io::json::array();
        for (const auto& a : m.at("artifacts")) {
            if (a.at("path") != "report.json") arts.push_back(a);
        }
        return arts;
    };
    io::json m1 = read_json(out1 / "manifest.json");
    io::json m2 = read_json(out2 / "manifest.json");
    CHECK(strip_report(m1) == strip_report(m2));
}

TEST_CASE("solve rejects nonpositive coefficients with exit 1", "[cli]") {
    io::json j = read_json(kConfigs + "/ci_quadratic.json");
    j["alpha"][0]["value"] = 0.0;
    const fs::path dir = temp_dir("badcfg");
    {
        std::ofstream out(dir / "bad.json");
        out << j.dump(2);
    }
    cli::Options opt;
    opt.config = (dir / "bad.json").string();
    opt.out = (dir / "out").string();
    CHECK(cli::run_solve(opt) == 1);
    const io::json err = read_json(dir / "out" / "error.json");
    CHECK(err.at("message").get<std::string>().find("positivity") != std::string::npos);
}

TEST_CASE("solve reports homotopy failure with exit 2 and a trace", "[cli]") {
    const fs::path out = temp_dir("stress");
    cli::Options opt;
    opt.config = kConfigs + "/stress_unreachable.json";
    opt.out = out.string();
    CHECK(cli::run_solve(opt) == 2);
    const io::json report = read_json(out / "report.json");
    CHECK(report.at("status") == "homotopy_failure");
    CHECK(report.at("t_steps").size() >= 1);
    CHECK(fs::exists(out / "error.json"));
}

TEST_CASE("check command on valid and broken configs", "[cli]") {
    cli::Options opt;
    opt.config = kConfigs + "/ci_deflated.json";
    opt.out = temp_dir("check1").string();
    CHECK(cli::run_check(opt) == 0);

    opt.config = kConfigs + "/direct_small.json";
    opt.out = temp_dir("check2").string();
    CHECK(cli::run_check(opt) == 0);

    // over-deflation: rejected with the violating points listed
    io::json j = read_json(kConfigs + "/ci_deflated.json");
    j["deflation"]["c"] = 10.0;
    const fs::path dir = temp_dir("check3");
    {
        std::ofstream out(dir / "bad.json");
        out << j.dump(2);
    }
    opt.config = (dir / "bad.json").string();
    opt.out = (dir / "out").string();
    CHECK(cli::run_check(opt) == 1);

    // malformed JSON
    {
        std::ofstream out(dir / "broken.json");
        out << "{ not json";
    }
    opt.config = (dir / "broken.json").string();
    CHECK(cli::run_check(opt) == 1);
}

TEST_CASE("suite command runs and reports", "[cli]") {
    cli::Options opt;
    opt.suite_name = "operator";
    opt.seed = 42;
    const fs::path out = temp_dir("suite");
    opt.out = out.string();
    CHECK(cli::run_suite(opt) == 0);
    const io::json j = read_json(out / "suite_operator.json");
    CHECK(j.at("passed").get<bool>());
    CHECK(j.at("cases").get<long>() > 0);

    opt.suite_name = "no_such_suite";
    CHECK(cli::run_suite(opt) == 1);
}

TEST_CASE("manufacture command writes the expanded config", "[cli]") {
    const fs::path out = temp_dir("manu");
    cli::Options opt;
    opt.config = kConfigs + "/ci_quadratic.json";
    opt.out = out.string();
    REQUIRE(cli::run_manufacture(opt) == 0);
    const io::json j = read_json(out / "manufactured_config.json");
    CHECK(j.at("manufactured").at("beta_min").get<double>() == Approx(0.25));
    CHECK(j.at("manufactured").at("beta_max").get<double>() == Approx(0.25));
    CHECK(j.at("manufactured").at("verified").get<bool>());

    // direct configs cannot be manufactured
    opt.config = kConfigs + "/direct_small.json";
    opt.out = temp_dir("manu2").string();
    CHECK(cli::run_manufacture(opt) == 1);
}
