#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nsopt/errors.hpp"
#include "nsopt/record.hpp"

using namespace nsopt;

namespace {

IterationRecord sample_record() {
    IterationRecord r;
    r.iteration = 3;
    r.params = DesignParams{};
    r.rationale = "widen the gate";
    r.converged = true;
    PerformanceMetrics m;
    m.ss_mv_dec = 64.5;
    m.ioff_a_per_um = 2e-9;
    m.ion_a_per_um = 1.5e-3;
    m.onoff_log10 = 5.87;
    r.metrics = m;
    r.score = 0.25;
    r.wall_time_s = 0.0123;
    return r;
}

} // namespace

TEST_CASE("iteration records survive a JSON round trip") {
    IterationRecord r = sample_record();
    IterationRecord back = record_from_json(record_to_json(r));
    CHECK(back.iteration == r.iteration);
    CHECK(back.params.gate_length == r.params.gate_length);
    CHECK(back.rationale == r.rationale);
    CHECK(back.converged);
    CHECK_FALSE(back.from_recovery);
    REQUIRE(back.metrics.has_value());
    CHECK(back.metrics->ioff_a_per_um == 2e-9);
    REQUIRE(back.score.has_value());
    CHECK(*back.score == 0.25);
    CHECK(back.wall_time_s == 0.0123);
}

TEST_CASE("non-converged records carry the diagnostic and null metrics") {
    IterationRecord r;
    r.iteration = 1;
    r.rationale = "too aggressive";
    r.converged = false;
    r.diagnostic = "solver stalled\nlast residual 3e2";
    json j = record_to_json(r);
    CHECK(j["metrics"].is_null());
    CHECK(j["score"].is_null());
    IterationRecord back = record_from_json(j);
    CHECK(back.diagnostic == r.diagnostic);
    CHECK_FALSE(back.metrics.has_value());
}

TEST_CASE("trajectory lines are single-line JSON and parse back in order") {
    IterationRecord a = sample_record();
    a.iteration = 0;
    IterationRecord b = sample_record();
    b.iteration = 1;
    std::string text = trajectory_line(a) + "\n" + trajectory_line(b); // blank line tolerated
    CHECK(trajectory_line(a).find('\n') == trajectory_line(a).size() - 1);
    std::vector<IterationRecord> rs = load_trajectory(text);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].iteration == 0);
    CHECK(rs[1].iteration == 1);
}

TEST_CASE("a corrupt line is reported with its 1-based number") {
    std::string text = trajectory_line(sample_record()) + "{ truncated\n";
    try {
        load_trajectory(text);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::corrupt_trajectory);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("records missing mandatory keys are rejected") {
    json j = record_to_json(sample_record());
    j.erase("rationale");
    CHECK_THROWS_WITH_AS(record_from_json(j), doctest::Contains("rationale"), Error);
    CHECK_THROWS_AS(record_from_json(json::array()), Error);
}
