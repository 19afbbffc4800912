#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nsopt/errors.hpp"
#include "nsopt/orchestrator.hpp"
#include "support/testutil.hpp"

using namespace nsopt;
using testsupport::FunctionTransport;
using testsupport::TempDir;

namespace fs = std::filesystem;

namespace {

DesignParams bad_seed() {
    DesignParams p;
    p.gate_length = 8.0;
    p.sheet_thickness = 4.0;
    p.eot = 1.5;
    p.gate_workfunction = 4.55;
    return p;
}

RunConfig baseline_config() {
    RunConfig cfg;
    cfg.seed = bad_seed();
    return cfg; // baseline agent, surrogate backend, 25 proposals
}

IterationRecord fake_converged(int iteration, const DesignParams& p, const SpecTargets& t) {
    IterationRecord r;
    r.iteration = iteration;
    r.params = p;
    r.rationale = "scripted";
    r.converged = true;
    PerformanceMetrics m;
    m.ss_mv_dec = 150.0;
    m.ioff_a_per_um = 1e-4;
    m.ion_a_per_um = 1e-4;
    m.onoff_log10 = 0.0;
    m.verdicts = check_spec(m, t);
    r.metrics = m;
    r.score = baseline_score(m, t);
    return r;
}

json line_without_walltime(const std::string& line) {
    json j = parse_json(line);
    j.erase("wall_time_s");
    return j;
}

} // namespace

TEST_CASE("the baseline loop walks the gate from the leaky seed to the targets") {
    TempDir dir("orch_baseline");
    RunResult res = run_loop(dir.str(), baseline_config());

    CHECK(res.report.status == "success");
    CHECK(res.report.iterations == 4);
    CHECK(res.report.proposals == 3);
    REQUIRE(res.report.best_iteration.has_value());
    CHECK(*res.report.best_iteration == 3);

    REQUIRE(res.trajectory.size() == 4);
    CHECK(res.trajectory[0].rationale == "seed design");
    CHECK(res.trajectory[0].params.gate_length == 8.0);
    CHECK(res.trajectory[1].params.gate_length == 12.25);
    CHECK(res.trajectory[2].params.gate_length == 16.5);
    CHECK(res.trajectory[3].params.gate_length == 20.75);
    for (const IterationRecord& r : res.trajectory) {
        CHECK(r.converged);
        CHECK_FALSE(r.from_recovery);
    }

    // seed and best metrics, frozen from the pipeline
    REQUIRE(res.report.before.has_value());
    CHECK(res.report.before->ss_mv_dec == doctest::Approx(101.33860127493006).epsilon(1e-12));
    CHECK(res.report.before->ioff_a_per_um == doctest::Approx(3.5847384648878806e-06).epsilon(1e-12));
    REQUIRE(res.report.after.has_value());
    CHECK(res.report.after->ss_mv_dec == doctest::Approx(63.12251245811175).epsilon(1e-12));
    CHECK(res.report.after->ioff_a_per_um == doctest::Approx(6.19531247095982e-09).epsilon(1e-12));
    REQUIRE(res.report.after->verdicts.has_value());
    CHECK(res.report.after->verdicts->meets_all);

    // the score falls monotonically to zero along this trajectory
    REQUIRE(res.trajectory[0].score.has_value());
    CHECK(*res.trajectory[0].score == doctest::Approx(2.9619380491944023).epsilon(1e-12));
    for (std::size_t i = 1; i < res.trajectory.size(); ++i)
        CHECK(*res.trajectory[i].score < *res.trajectory[i - 1].score);
    CHECK(*res.trajectory[3].score == 0.0);

    // run directory layout
    CHECK(fs::exists(dir.path() / "config.json"));
    CHECK(fs::exists(dir.path() / "report.json"));
    for (int i = 0; i < 4; ++i) {
        std::string n = std::to_string(i);
        CHECK(fs::exists(dir.path() / "decks" / ("iter_" + n) / "nsfet_dvs.cmd"));
        CHECK(fs::exists(dir.path() / "decks" / ("iter_" + n) / "nsfet_des.cmd"));
        CHECK(fs::exists(dir.path() / "results" / ("iter_" + n + ".json")));
    }

    // a second identical run reiterates nothing and reports the same outcome
    RunResult again = run_loop(dir.str(), baseline_config());
    CHECK(again.report.status == "success");
    CHECK(again.trajectory.size() == 4);
    CHECK(report_to_json(again.report) == report_to_json(res.report));
    CHECK_FALSE(fs::exists(dir.path() / "decks" / "iter_4"));
}

TEST_CASE("a run interrupted mid-flight resumes to the uninterrupted trajectory") {
    TempDir control("orch_control");
    TempDir crashed("orch_crashed");

    RunResult want = run_loop(control.str(), baseline_config());
    REQUIRE(want.report.status == "success");

    // stage the crash: config plus the first two trajectory lines, no report
    std::string text = read_text_file(control.str() + "/trajectory.jsonl");
    std::vector<std::string> lines = split_lines(text);
    REQUIRE(lines.size() >= 4);
    write_text_file(crashed.str() + "/config.json",
                    read_text_file(control.str() + "/config.json"));
    write_text_file(crashed.str() + "/trajectory.jsonl", lines[0] + "\n" + lines[1] + "\n");

    RunResult got = resume_run(crashed.str());
    CHECK(got.report.status == "success");
    REQUIRE(got.trajectory.size() == want.trajectory.size());

    std::vector<std::string> resumed = split_lines(read_text_file(crashed.str() + "/trajectory.jsonl"));
    REQUIRE(resumed.size() == lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i)
        CHECK(line_without_walltime(resumed[i]) == line_without_walltime(lines[i]));
}

TEST_CASE("resuming an empty directory is a configuration error") {
    TempDir dir("orch_empty");
    CHECK_THROWS_WITH_AS(resume_run(dir.str()), doctest::Contains("config.json"), Error);
}

TEST_CASE("a run directory refuses a different configuration") {
    TempDir dir("orch_conflict");
    run_loop(dir.str(), baseline_config());
    RunConfig other = baseline_config();
    other.max_iterations = 3;
    try {
        run_loop(dir.str(), other);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config_error);
        CHECK(std::string(e.what()).find("different config") != std::string::npos);
    }
}

TEST_CASE("the proposal budget caps the loop") {
    TempDir dir("orch_budget");
    RunConfig cfg = baseline_config();
    cfg.max_iterations = 1;
    RunResult res = run_loop(dir.str(), cfg);
    CHECK(res.report.status == "budget_exhausted");
    CHECK(res.report.iterations == 2);
    REQUIRE(res.report.best_iteration.has_value());
    CHECK(*res.report.best_iteration == 1); // the single allowed step still improved
    REQUIRE(res.report.after.has_value());
    CHECK(res.report.after->ss_mv_dec == doctest::Approx(74.92832183828328).epsilon(1e-12));
}

TEST_CASE("a spent search space ends the run as search_exhausted") {
    TempDir dir("orch_spent");
    RunConfig cfg;
    cfg.seed = DesignParams{};
    cfg.targets.ioff_max = 1e-30; // unattainable: no record ever passes
    cfg.max_iterations = 1000;

    // Fabricate a finished-everywhere trajectory: every design the pattern
    // search can reach from this seed, marked converged-but-failing.
    std::vector<IterationRecord> records{fake_converged(0, cfg.seed, cfg.targets)};
    BaselineAgent agent(cfg.targets, cfg.space);
    for (;;) {
        try {
            AgentStep s = agent.propose(records);
            records.push_back(
                fake_converged(static_cast<int>(records.size()), s.params, cfg.targets));
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::exhausted_space);
            break;
        }
    }
    std::string text;
    for (const IterationRecord& r : records) text += trajectory_line(r);
    write_text_file(dir.str() + "/config.json", run_config_to_json(cfg).dump(2) + "\n");
    write_text_file(dir.str() + "/trajectory.jsonl", text);

    RunResult res = resume_run(dir.str());
    CHECK(res.report.status == "search_exhausted");
    CHECK(res.report.iterations == static_cast<int>(records.size()));
    CHECK(fs::exists(dir.path() / "report.json"));
}

TEST_CASE("a scripted model agent drives the loop to the targets") {
    TempDir dir("orch_llm");
    RunConfig cfg = baseline_config();
    cfg.agent = json{{"kind", "llm"}};
    FunctionTransport transport([](const ChatRequest&) {
        json j = params_to_json(DesignParams{}); // the reference design passes
        j["rationale"] = "return to the known-good corner";
        return j.dump();
    });
    RunResult res = run_loop(dir.str(), cfg, &transport);
    CHECK(res.report.status == "success");
    CHECK(res.report.iterations == 2);
    CHECK(res.trajectory[1].rationale == "return to the known-good corner");
    CHECK(transport.requests.size() == 1);
    // injected transports leave no transcript behind
    CHECK_FALSE(fs::exists(dir.path() / "transcript.jsonl"));
}

TEST_CASE("a non-convergent proposal reroutes the next request through recovery") {
    TempDir dir("orch_recovery");
    RunConfig cfg = baseline_config();
    cfg.agent = json{{"kind", "llm"}};

    DesignParams violating = bad_seed();
    violating.sheet_thickness = 8.0; // gate 8 nm < twice the sheet: the solver bails out
    FunctionTransport transport([&](const ChatRequest& req) {
        const std::string& prompt = req.messages.back().content;
        bool recovery = prompt.find("failed to converge in the device simulator") != std::string::npos;
        json j = params_to_json(recovery ? DesignParams{} : violating);
        return j.dump();
    });

    RunResult res = run_loop(dir.str(), cfg, &transport);
    CHECK(res.report.status == "success");
    REQUIRE(res.trajectory.size() == 3);
    CHECK_FALSE(res.trajectory[1].converged);
    CHECK(res.trajectory[1].diagnostic.find("gate_length") != std::string::npos);
    CHECK(res.trajectory[2].from_recovery);
    CHECK(res.trajectory[2].converged);

    REQUIRE(transport.requests.size() == 2);
    const std::string& second = transport.requests[1].messages.back().content;
    CHECK(second.find("Last successful design:\n" + params_to_json(bad_seed()).dump()) !=
          std::string::npos);
    CHECK(second.find("Failed design:\n" + params_to_json(violating).dump()) != std::string::npos);
}

TEST_CASE("run configs and reports survive their JSON round trips") {
    RunConfig cfg = baseline_config();
    cfg.agent = json{{"kind", "llm"}, {"model", "tiny"}};
    cfg.max_iterations = 7;
    json j = run_config_to_json(cfg);
    CHECK(run_config_to_json(run_config_from_json(j)) == j);

    json bad = j;
    bad["budget"] = 3;
    CHECK_THROWS_WITH_AS(run_config_from_json(bad), doctest::Contains("budget"), Error);

    json out_of_space = j;
    out_of_space["seed"]["gate_length"] = 3.0; // below the box
    CHECK_THROWS_AS(run_config_from_json(out_of_space), Error);

    RunReport rep;
    rep.status = "success";
    rep.iterations = 4;
    rep.proposals = 3;
    rep.best_iteration = 3;
    PerformanceMetrics m;
    m.ss_mv_dec = 63.1;
    m.ioff_a_per_um = 6.2e-9;
    m.ion_a_per_um = 1.2e-3;
    m.onoff_log10 = 5.3;
    rep.after = m;
    rep.wall_time_s = 1.5;
    json rj = report_to_json(rep);
    RunReport back = report_from_json(rj);
    CHECK(report_to_json(back) == rj);
    CHECK(back.before == std::nullopt);
}
