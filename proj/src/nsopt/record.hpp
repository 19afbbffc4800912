#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsopt/jsonutil.hpp"
#include "nsopt/params.hpp"
#include "nsopt/postproc.hpp"

namespace nsopt {

// One optimization-loop iteration, as appended to the trajectory log.
// Iteration 0 is always the seed design.
struct IterationRecord {
    int iteration = 0;
    DesignParams params;
    std::string rationale;
    bool from_recovery = false; // params came from a non-convergence recovery proposal
    bool converged = false;
    std::string diagnostic;                    // solver transcript tail when not converged
    std::optional<PerformanceMetrics> metrics; // present iff converged
    std::optional<double> score;               // hinge distance to target, present iff converged
    double wall_time_s = 0.0;
};

json record_to_json(const IterationRecord& r);
IterationRecord record_from_json(const json& j);

// One JSON document per line. load_trajectory reports the first bad line
// (1-based) through a CorruptTrajectory error.
std::string trajectory_line(const IterationRecord& r);
std::vector<IterationRecord> load_trajectory(const std::string& text);

} // namespace nsopt
