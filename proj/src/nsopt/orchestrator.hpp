#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsopt/agent.hpp"
#include "nsopt/backend.hpp"
#include "nsopt/deckgen.hpp"
#include "nsopt/record.hpp"

namespace nsopt {

// Everything a closed-loop run needs. Serialized into the run directory as
// config.json so a run can be resumed (or replayed) from disk alone.
struct RunConfig {
    DesignParams seed;
    ParamSpace space = default_param_space();
    SpecTargets targets;
    // kind/start/step come from here; each iteration sweeps the gate up to
    // its own design's vdd (stop and fixed_bias follow the design).
    SweepConfig sweep;
    BackendConfig backend = SurrogateBackend{};
    json agent = json{{"kind", "baseline"}};
    int max_iterations = 25; // proposals after the seed
    MeshTag mesh = MeshTag::Default;
    ModelsTag models = ModelsTag::DriftDiffusion;
};

RunConfig run_config_from_json(const json& j); // strict keys; validates seed in space
json run_config_to_json(const RunConfig& c);

struct RunReport {
    std::string status = "budget_exhausted"; // success | budget_exhausted | search_exhausted
    int iterations = 0;                      // records in the trajectory, seed included
    int proposals = 0;                       // iterations - 1
    std::optional<int> best_iteration;       // best-scoring converged record
    std::optional<PerformanceMetrics> before; // seed metrics, absent if the seed never converged
    std::optional<PerformanceMetrics> after;  // best record's metrics
    double wall_time_s = 0.0;                 // summed over records
};

json report_to_json(const RunReport& r);
RunReport report_from_json(const json& j);

struct RunResult {
    RunReport report;
    std::vector<IterationRecord> trajectory;
};

// Runs the design loop in run_dir, resuming whatever is already there.
//
// Layout: config.json, trajectory.jsonl (one record per iteration, appended
// and flushed as soon as each evaluation finishes), decks/iter_<i>/ with the
// generated command files, results/iter_<i>.json for converged iterations,
// transcript.jsonl for model traffic, and report.json once finished. A
// directory with report.json already present returns immediately.
//
// `transport` overrides model traffic (tests inject scripted transports).
// With none given, model-backed agents talk HTTP and record into
// transcript.jsonl, or replay from it when `replay` is set.
RunResult run_loop(const std::string& run_dir, const RunConfig& cfg, Transport* transport = nullptr,
                   bool replay = false);

// run_loop with the config read back from run_dir/config.json.
RunResult resume_run(const std::string& run_dir, Transport* transport = nullptr, bool replay = false);

} // namespace nsopt
