#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>

#include "nsopt/errors.hpp"
#include "nsopt/orchestrator.hpp"
#include "nsopt/plot.hpp"
#include "support/testutil.hpp"

using namespace nsopt;
using testsupport::TempDir;

namespace fs = std::filesystem;

namespace {

std::vector<IterationRecord> mixed_trajectory() {
    std::vector<IterationRecord> rs;
    IterationRecord ok;
    ok.iteration = 0;
    ok.params = DesignParams{};
    ok.converged = true;
    PerformanceMetrics m;
    m.ss_mv_dec = 70.0;
    m.ioff_a_per_um = 2e-9;
    m.ion_a_per_um = 1e-3;
    m.onoff_log10 = 5.7;
    ok.metrics = m;
    ok.score = 0.0;
    rs.push_back(ok);

    IterationRecord bad;
    bad.iteration = 1;
    bad.params = DesignParams{};
    bad.converged = false;
    bad.diagnostic = "solver bailed out";
    rs.push_back(bad);
    return rs;
}

} // namespace

TEST_CASE("the trajectory table keeps non-converged rows with empty cells") {
    std::string csv = trajectory_csv(mixed_trajectory());
    std::vector<std::string> lines = split_lines(csv);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "iteration,converged,ss_mv_dec,ioff_a_per_um,ion_a_per_um,onoff_log10,score");
    CHECK(lines[1].rfind("0,1,70", 0) == 0);
    CHECK(lines[2] == "1,0,,,,,");
}

TEST_CASE("trajectory and curve figures are well-formed SVG documents") {
    std::string svg = trajectory_svg(mixed_trajectory(), SpecTargets{});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    // one dashed target rule per panel
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);

    SimulationOutcome out = simulate_iv(DesignParams{}, SweepConfig{});
    const Converged& conv = std::get<Converged>(out);
    std::string iv = iv_svg(conv.iv);
    CHECK(iv.rfind("<svg", 0) == 0);
    CHECK(iv.find("polyline") != std::string::npos);

    std::string bands = bands_svg(*conv.bands_on);
    CHECK(bands.rfind("<svg", 0) == 0);
    CHECK(bands.find("</svg>") != std::string::npos);
}

TEST_CASE("degenerate inputs are refused as empty selections") {
    CHECK_THROWS_AS(trajectory_svg({}, SpecTargets{}), Error);
    IVCurve tiny;
    tiny.vg = {0.0};
    tiny.id = {1e-9};
    try {
        iv_svg(tiny);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_selection);
    }
    BandDiagram none;
    CHECK_THROWS_AS(bands_svg(none), Error);
}

TEST_CASE("rendering a finished run yields the full set of figures") {
    TempDir dir("plot_run");
    RunConfig cfg;
    cfg.seed = DesignParams{}; // passes at once: one-record trajectory
    run_loop(dir.str(), cfg);

    std::vector<std::string> written = plot_run(dir.str(), "", -1);
    REQUIRE(written.size() == 8); // trajectory csv/svg + iv pair + two band pairs
    for (const std::string& path : written) {
        CHECK(fs::exists(path));
        CHECK(fs::path(path).parent_path() == dir.path() / "plots");
        CHECK(fs::file_size(path) > 0);
    }

    // explicit out_dir and explicit iteration
    TempDir alt("plot_alt");
    std::vector<std::string> there = plot_run(dir.str(), alt.str(), 0);
    CHECK(there.size() == 8);
    CHECK(fs::exists(alt.path() / "iter_0_iv.svg"));

    CHECK_THROWS_WITH_AS(plot_run(dir.str(), "", 5), doctest::Contains("iteration 5"), Error);
}

TEST_CASE("a run without a trajectory cannot be plotted") {
    TempDir dir("plot_none");
    try {
        plot_run(dir.str(), "", -1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::io_error);
    }
}
