#pragma once

#include <string>
#include <variant>

#include "nsopt/jsonutil.hpp"
#include "nsopt/params.hpp"
#include "nsopt/surrogate.hpp"
#include "nsopt/sweep.hpp"

namespace nsopt {

// Built-in analytic solver. No external processes involved.
struct SurrogateBackend {
    model::Coefficients coefficients = model::kDefault;
};

// Arbitrary simulator driven through the shell. The command runs inside the
// deck directory (where the generated command files sit) and must leave a
// current-voltage table at `iv_file`, also relative to that directory.
struct ExternalBackend {
    std::string command;
    std::string iv_file = "iv.csv";
    double timeout_s = 600.0;
};

using BackendConfig = std::variant<SurrogateBackend, ExternalBackend>;

const char* backend_kind_name(const BackendConfig& cfg);

// Executes one bias sweep. Solver-level failures (timeout, nonzero exit,
// rule-triggered bailout) come back as the non-convergent alternative with a
// diagnostic transcript; infrastructure problems (unstartable command,
// missing or unreadable output table) throw.
SimulationOutcome run_backend(const BackendConfig& cfg, const DesignParams& p,
                                     const SweepConfig& sweep, const std::string& deck_dir);

// Accepts either comma-separated or whitespace-delimited two-column text
// (gate voltage, drain current per micron). Lines starting with '#', '*' or
// ';' and a leading header line are skipped. Needs at least two points.
IVCurve parse_iv_file(const std::string& text, double vd,
                             double temperature = model::kTemperature);

BackendConfig backend_from_json(const json& j);
json backend_to_json(const BackendConfig& cfg);

} // namespace nsopt
