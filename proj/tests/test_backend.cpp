#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nsopt/backend.hpp"
#include "nsopt/errors.hpp"
#include "support/testutil.hpp"

using namespace nsopt;
using testsupport::TempDir;

TEST_CASE("current tables accept comma, tab and space delimiters plus comments") {
    std::string text =
        "vg,id\n"
        "# comment\n"
        "0.0,1e-12\n"
        "0.1\t1e-10\n"
        "; another comment\n"
        "0.2 1e-8\n"
        "\n"
        "* footer-style comment\n";
    IVCurve c = parse_iv_file(text, 0.65);
    REQUIRE(c.vg.size() == 3);
    CHECK(c.vg[1] == 0.1);
    CHECK(c.id[2] == 1e-8);
    CHECK(c.vd == 0.65);
}

TEST_CASE("a non-numeric line after data points is an error naming the line") {
    std::string text = "0.0 1e-12\n0.1 1e-10\nnot-a-number 3\n";
    try {
        parse_iv_file(text, 0.65);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("tables need two columns and at least two points") {
    CHECK_THROWS_WITH_AS(parse_iv_file("0.0\n0.1\n", 0.65), doctest::Contains("second column"),
                         Error);
    CHECK_THROWS_WITH_AS(parse_iv_file("0.0 1e-12\n", 0.65),
                         doctest::Contains("fewer than two points"), Error);
}

TEST_CASE("the built-in solver backend matches the solver called directly") {
    DesignParams p;
    SweepConfig sweep;
    SimulationOutcome direct = simulate_iv(p, sweep);
    SimulationOutcome via = run_backend(SurrogateBackend{}, p, sweep, ".");
    const IVCurve& a = std::get<Converged>(direct).iv;
    const IVCurve& b = std::get<Converged>(via).iv;
    REQUIRE(a.vg.size() == b.vg.size());
    for (std::size_t i = 0; i < a.vg.size(); ++i) {
        CHECK(a.vg[i] == b.vg[i]);
        CHECK(a.id[i] == b.id[i]);
    }
}

TEST_CASE("an external command that writes the table converges") {
    TempDir dir("backend_ok");
    ExternalBackend b;
    b.command = "printf 'vg id\\n0.0 1e-12\\n0.3 1e-9\\n0.65 1e-5\\n' > iv.csv";
    b.iv_file = "iv.csv";
    SimulationOutcome out = run_backend(b, DesignParams{}, SweepConfig{}, dir.str());
    REQUIRE(std::holds_alternative<Converged>(out));
    const Converged& conv = std::get<Converged>(out);
    CHECK(conv.iv.id.back() == 1e-5);
    CHECK_FALSE(conv.bands_on.has_value()); // band profiles only exist for the built-in solver
}

TEST_CASE("a nonzero exit is non-convergence carrying the output tail") {
    TempDir dir("backend_fail");
    ExternalBackend b;
    b.command = "echo 'newton failed at step 12' >&2; exit 3";
    SimulationOutcome out = run_backend(b, DesignParams{}, SweepConfig{}, dir.str());
    REQUIRE(std::holds_alternative<NonConvergent>(out));
    const std::string& d = std::get<NonConvergent>(out).diagnostic;
    CHECK(d.find("code 3") != std::string::npos);
    CHECK(d.find("newton failed at step 12") != std::string::npos);
}

TEST_CASE("an unstartable command is a configuration error, not non-convergence") {
    TempDir dir("backend_127");
    ExternalBackend b;
    b.command = "definitely_not_a_simulator_binary_xyz";
    try {
        run_backend(b, DesignParams{}, SweepConfig{}, dir.str());
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config_error);
        CHECK(std::string(e.what()).find("127") != std::string::npos);
    }
}

TEST_CASE("a command exceeding its deadline is reported as a timeout") {
    TempDir dir("backend_timeout");
    ExternalBackend b;
    b.command = "sleep 5";
    b.timeout_s = 0.2;
    SimulationOutcome out = run_backend(b, DesignParams{}, SweepConfig{}, dir.str());
    REQUIRE(std::holds_alternative<NonConvergent>(out));
    CHECK(std::get<NonConvergent>(out).diagnostic.find("timed out") != std::string::npos);
}

TEST_CASE("a missing output table throws instead of converging") {
    TempDir dir("backend_noout");
    ExternalBackend b;
    b.command = "true";
    CHECK_THROWS_AS(run_backend(b, DesignParams{}, SweepConfig{}, dir.str()), Error);
}

TEST_CASE("backend configs round-trip through JSON and reject junk") {
    BackendConfig s = backend_from_json(json{{"kind", "surrogate"}});
    CHECK(std::holds_alternative<SurrogateBackend>(s));
    CHECK(backend_to_json(s) == json{{"kind", "surrogate"}});

    json ej{{"kind", "external"}, {"command", "run_sim"}, {"iv_file", "out/iv.txt"},
            {"timeout_s", 30.0}};
    BackendConfig e = backend_from_json(ej);
    CHECK(backend_to_json(e) == ej);
    CHECK(std::string(backend_kind_name(e)) == "external");

    CHECK_THROWS_WITH_AS(backend_from_json(json{{"kind", "surrogate"}, {"mesh", 3}}),
                         doctest::Contains("mesh"), Error);
    CHECK_THROWS_AS(backend_from_json(json{{"kind", "external"}}), Error); // command required
    CHECK_THROWS_WITH_AS(
        backend_from_json(json{{"kind", "external"}, {"command", "x"}, {"iv_file", "/tmp/iv"}}),
        doctest::Contains("relative"), Error);
    CHECK_THROWS_WITH_AS(backend_from_json(json{{"kind", "spice"}}), doctest::Contains("spice"),
                         Error);
}
