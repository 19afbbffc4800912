#include "nsopt/orchestrator.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>

#include "nsopt/errors.hpp"

namespace fs = std::filesystem;

namespace nsopt {

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::schema_error, "run config must be an object");
    if (!j.contains("seed")) fail(Errc::schema_error, "run config lacks 'seed'");
    RunConfig c;
    for (auto& [key, value] : j.items()) {
        if (key == "seed")
            c.seed = params_from_json(value);
        else if (key == "space")
            c.space = space_from_json(value);
        else if (key == "targets")
            c.targets = targets_from_json(value);
        else if (key == "sweep")
            c.sweep = sweep_from_json(value);
        else if (key == "backend")
            c.backend = backend_from_json(value);
        else if (key == "agent") {
            if (!value.is_object()) fail(Errc::schema_error, "agent config must be an object");
            c.agent = value;
        } else if (key == "max_iterations") {
            if (!value.is_number_integer() || value.get<int>() < 0)
                fail(Errc::schema_error, "max_iterations must be a non-negative integer");
            c.max_iterations = value.get<int>();
        } else if (key == "mesh" && value.is_string())
            c.mesh = mesh_tag_from_string(value.get<std::string>());
        else if (key == "models" && value.is_string())
            c.models = models_tag_from_string(value.get<std::string>());
        else
            fail(Errc::schema_error, "unknown run config key '" + key + "'");
    }
    ValidationResult v = validate(c.seed, c.space);
    if (!v.in_bounds)
        fail(Errc::invalid_params, "seed design is invalid: " + v.violations.front().message);
    return c;
}

json run_config_to_json(const RunConfig& c) {
    return json{{"seed", params_to_json(c.seed)},
                {"space", space_to_json(c.space)},
                {"targets", targets_to_json(c.targets)},
                {"sweep", sweep_to_json(c.sweep)},
                {"backend", backend_to_json(c.backend)},
                {"agent", c.agent},
                {"max_iterations", c.max_iterations},
                {"mesh", mesh_tag_name(c.mesh)},
                {"models", models_tag_name(c.models)}};
}

json report_to_json(const RunReport& r) {
    return json{{"schema_version", 1},
                {"status", r.status},
                {"iterations", r.iterations},
                {"proposals", r.proposals},
                {"best_iteration", r.best_iteration ? json(*r.best_iteration) : json(nullptr)},
                {"before", r.before ? metrics_to_json(*r.before) : json(nullptr)},
                {"after", r.after ? metrics_to_json(*r.after) : json(nullptr)},
                {"wall_time_s", r.wall_time_s}};
}

RunReport report_from_json(const json& j) {
    if (!j.is_object() || !j.contains("status") || !j.contains("iterations"))
        fail(Errc::schema_error, "run report lacks status/iterations");
    RunReport r;
    r.status = j["status"].get<std::string>();
    r.iterations = j["iterations"].get<int>();
    r.proposals = j.value("proposals", r.iterations > 0 ? r.iterations - 1 : 0);
    if (j.contains("best_iteration") && !j["best_iteration"].is_null())
        r.best_iteration = j["best_iteration"].get<int>();
    if (j.contains("before") && !j["before"].is_null()) r.before = metrics_from_json(j["before"]);
    if (j.contains("after") && !j["after"].is_null()) r.after = metrics_from_json(j["after"]);
    if (j.contains("wall_time_s")) r.wall_time_s = j["wall_time_s"].get<double>();
    return r;
}

namespace {

SweepConfig sweep_for_design(const SweepConfig& base, const DesignParams& p) {
    SweepConfig s = base;
    s.stop = p.vdd;
    s.fixed_bias = p.vdd;
    validate_sweep(s);
    return s;
}

void append_trajectory(const std::string& path, const IterationRecord& r) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot open trajectory for append: " + path);
    out << trajectory_line(r);
    out.flush();
    if (!out) fail(Errc::io_error, "cannot write trajectory: " + path);
}

IterationRecord evaluate_design(const RunConfig& cfg, const std::string& run_dir, int iteration,
                                const DesignParams& p, const std::string& rationale,
                                bool from_recovery) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.params = p;
    rec.rationale = rationale;
    rec.from_recovery = from_recovery;

    auto t0 = std::chrono::steady_clock::now();
    SweepConfig sweep = sweep_for_design(cfg.sweep, p);
    std::string deck_dir = run_dir + "/decks/iter_" + std::to_string(iteration);
    DeckPair decks = make_deck_pair(p, sweep, cfg.mesh, cfg.models);
    write_text_file(deck_dir + "/" + decks.name + "_dvs.cmd", decks.sde);
    write_text_file(deck_dir + "/" + decks.name + "_des.cmd", decks.sdevice);

    SimulationOutcome outcome = run_backend(cfg.backend, p, sweep, deck_dir);
    if (const auto* nc = std::get_if<NonConvergent>(&outcome)) {
        rec.converged = false;
        rec.diagnostic = nc->diagnostic;
    } else {
        const Converged& conv = std::get<Converged>(outcome);
        try {
            PerformanceMetrics m = with_verdicts(extract_metrics(conv.iv, p.vdd), cfg.targets);
            rec.converged = true;
            rec.metrics = m;
            rec.score = baseline_score(m, cfg.targets);
            json doc = package_results(m, conv.iv, effective_width_um(p),
                                       conv.bands_on ? &*conv.bands_on : nullptr,
                                       conv.bands_off ? &*conv.bands_off : nullptr);
            write_text_file(run_dir + "/results/iter_" + std::to_string(iteration) + ".json",
                            doc.dump(2) + "\n");
        } catch (const Error& e) {
            // A curve the extractor cannot certify is treated like a solve
            // that never finished: same recovery path, honest diagnostic.
            if (e.code() != Errc::degenerate_curve && e.code() != Errc::non_monotonic &&
                e.code() != Errc::range_error)
                throw;
            rec.converged = false;
            rec.metrics.reset();
            rec.score.reset();
            rec.diagnostic = std::string("metric extraction failed: ") + e.what();
        }
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::optional<int> first_success(const std::vector<IterationRecord>& records) {
    for (const IterationRecord& r : records)
        if (r.converged && r.metrics && r.metrics->verdicts && r.metrics->verdicts->meets_all)
            return r.iteration;
    return std::nullopt;
}

RunReport summarize(const std::vector<IterationRecord>& records, const std::string& status) {
    RunReport rep;
    rep.status = status;
    rep.iterations = static_cast<int>(records.size());
    rep.proposals = rep.iterations > 0 ? rep.iterations - 1 : 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (const IterationRecord& r : records) {
        rep.wall_time_s += r.wall_time_s;
        if (!r.converged || !r.metrics) continue;
        double s = r.score ? *r.score : 0.0;
        if (s < best_score) {
            best_score = s;
            rep.best_iteration = r.iteration;
            rep.after = r.metrics;
        }
    }
    if (!records.empty() && records.front().converged) rep.before = records.front().metrics;
    return rep;
}

} // namespace

RunResult run_loop(const std::string& run_dir, const RunConfig& cfg, Transport* transport,
                   bool replay) {
    fs::create_directories(run_dir);
    const std::string config_path = run_dir + "/config.json";
    const std::string trajectory_path = run_dir + "/trajectory.jsonl";
    const std::string report_path = run_dir + "/report.json";
    const std::string transcript_path = run_dir + "/transcript.jsonl";

    json canonical = run_config_to_json(cfg);
    if (fs::exists(config_path)) {
        json existing = run_config_to_json(run_config_from_json(parse_json(read_text_file(config_path))));
        if (existing != canonical)
            fail(Errc::config_error, "run directory already holds a different config: " + config_path);
    } else {
        write_text_file(config_path, canonical.dump(2) + "\n");
    }

    // Finished runs are idempotent.
    if (fs::exists(report_path)) {
        RunResult done;
        done.report = report_from_json(parse_json(read_text_file(report_path)));
        if (fs::exists(trajectory_path))
            done.trajectory = load_trajectory(read_text_file(trajectory_path));
        return done;
    }

    std::vector<IterationRecord> records;
    if (fs::exists(trajectory_path)) records = load_trajectory(read_text_file(trajectory_path));

    // Transport wiring for model-backed agents.
    std::unique_ptr<Transport> http_holder;
    std::unique_ptr<Transport> transport_holder;
    std::string agent_kind = cfg.agent.value("kind", std::string("baseline"));
    if (!transport && agent_kind != "baseline") {
        if (replay) {
            transport_holder = std::make_unique<ReplayTransport>(transcript_path);
        } else {
            json llm_json = cfg.agent;
            llm_json.erase("kind");
            http_holder = std::make_unique<HttpTransport>(llm_config_from_json(llm_json));
            transport_holder = std::make_unique<RecordingTransport>(*http_holder, transcript_path);
        }
        transport = transport_holder.get();
    }
    std::unique_ptr<ProposalAgent> agent = make_agent(cfg.agent, transport, cfg.targets, cfg.space);

    if (records.empty()) {
        records.push_back(evaluate_design(cfg, run_dir, 0, cfg.seed, "seed design", false));
        append_trajectory(trajectory_path, records.back());
    }

    std::string status;
    for (;;) {
        if (first_success(records)) {
            status = "success";
            break;
        }
        if (static_cast<int>(records.size()) - 1 >= cfg.max_iterations) {
            status = "budget_exhausted";
            break;
        }
        AgentStep step;
        try {
            step = agent->propose(records);
        } catch (const Error& e) {
            if (e.code() != Errc::exhausted_space) throw;
            status = "search_exhausted";
            break;
        }
        DesignParams p = clamp(step.params, cfg.space);
        records.push_back(evaluate_design(cfg, run_dir, static_cast<int>(records.size()), p,
                                          step.rationale, step.from_recovery));
        append_trajectory(trajectory_path, records.back());
    }

    RunResult result;
    result.report = summarize(records, status);
    result.trajectory = std::move(records);
    write_text_file(report_path, report_to_json(result.report).dump(2) + "\n");
    return result;
}

RunResult resume_run(const std::string& run_dir, Transport* transport, bool replay) {
    const std::string config_path = run_dir + "/config.json";
    if (!fs::exists(config_path))
        fail(Errc::config_error, "no config.json in run directory: " + run_dir);
    RunConfig cfg = run_config_from_json(parse_json(read_text_file(config_path)));
    return run_loop(run_dir, cfg, transport, replay);
}

} // namespace nsopt
