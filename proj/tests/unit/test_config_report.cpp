#include "doctest.h"

#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kac/config.hpp"
#include "kac/report.hpp"

using namespace kac;

TEST_CASE("config parsing")
{
    std::istringstream in(R"(# defaults
seed = 0x10
alpha = 0.5

[gap]
N = 2, 3
alpha = 1.5   # overrides the default
replicas = 4
tol_n2_relative = 0.05
kernel = table:1,2,1

[spectrum]
N = 9
)");
    const ExperimentConfig cfg = parse_config(in, "gap");
    CHECK(cfg.seed == 16);
    CHECK(cfg.alpha == 1.5);
    CHECK(cfg.n_list == std::vector<int>{2, 3});
    CHECK(cfg.replicas == 4);
    CHECK(cfg.tol("n2_relative", 0.02) == 0.05);
    CHECK(cfg.tol("missing", 0.02) == 0.02);
    const KernelSpec k = make_kernel(cfg);
    CHECK_FALSE(k.uniform());
    CHECK(k.alpha == 1.5);
    const auto j = to_json(cfg);
    CHECK(j["experiment"] == "gap");
    CHECK(j["tolerances"]["n2_relative"] == 0.05);
}

TEST_CASE("config errors name their fields")
{
    std::istringstream in("[gap]\nalpha = 3\nN = 1\nreplicas = 0\nwhat = 1\nkernel = table:1,2\n");
    try {
        parse_config(in, "gap");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        CHECK(all.find("[gap].alpha: alpha out of [0,2]") != std::string::npos);
        CHECK(all.find("[gap].N") != std::string::npos);
        CHECK(all.find("[gap].replicas") != std::string::npos);
        CHECK(all.find("[gap].what: unknown key") != std::string::npos);
        CHECK(all.find("[gap].kernel") != std::string::npos);
        CHECK(e.messages().size() == 5);
    }
    std::istringstream bad_section("[nonsense]\n");
    CHECK_THROWS_AS(parse_config(bad_section, "gap"), ConfigError);
    std::istringstream bad_number("[gap]\nalpha = one\n");
    CHECK_THROWS_AS(parse_config(bad_number, "gap"), ConfigError);
    CHECK(validate(default_config("verify-all")).empty());
    CHECK_FALSE(validate(default_config("frobnicate")).empty());
}

namespace {
RunReport sample_report()
{
    RunReport r;
    r.run_id = make_run_id();
    r.config_echo = to_json(default_config("gap"));
    Check a;
    a.name = "first";
    a.estimate = 1.0;
    a.std_error = 0.1;
    a.reference = 1.05;
    a.provenance = "closed form";
    a.pass = true;
    a.detail_header = {"x", "y"};
    a.detail_rows = {{1, 2}, {3, 4}};
    Check b = a;
    b.name = "second/with slash";
    b.pass = false;
    b.informational = true;
    r.checks = {a, b};
    r.wall_time = 1.5;
    return r;
}
} // namespace

TEST_CASE("report emission")
{
    const RunReport r = sample_report();
    CHECK(all_pass(r.checks));
    const auto dir = std::filesystem::temp_directory_path() / "kac_report_test";
    std::filesystem::remove_all(dir);
    emit_report(r, dir.string());
    const auto j = nlohmann::json::parse(std::ifstream(dir / "summary.json"));
    for (const char* key : {"run_id", "config_echo", "checks", "wall_time"}) {
        CHECK(j.contains(key));
    }
    REQUIRE(j["checks"].size() == 2);
    for (const char* key : {"name", "estimate", "stderr", "reference", "provenance", "pass"}) {
        CHECK(j["checks"][0].contains(key));
    }
    CHECK(std::filesystem::exists(dir / "checks.csv"));
    int detail_files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "checks")) {
        (void)e;
        ++detail_files;
    }
    CHECK(detail_files == 2);
    std::filesystem::remove_all(dir);

    RunReport empty = r;
    empty.checks.clear();
    CHECK_THROWS_AS(emit_report(empty, dir.string()), std::invalid_argument);
    CHECK_THROWS(emit_report(r, "/proc/definitely/not/writable"));
}

TEST_CASE("summary is deterministic apart from run id and wall time")
{
    RunReport a = sample_report();
    RunReport b = sample_report();
    b.wall_time = 99.0;
    b.run_id = "other";
    auto ja = nlohmann::json::parse(summary_json(a));
    auto jb = nlohmann::json::parse(summary_json(b));
    ja.erase("run_id");
    jb.erase("run_id");
    ja.erase("wall_time");
    jb.erase("wall_time");
    CHECK(ja == jb);
    CHECK(make_run_id() != make_run_id());
}
