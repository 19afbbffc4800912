#pragma once

#include <string>
#include <vector>

#include "nsopt/jsonutil.hpp"

namespace nsopt {

enum class SweepKind { IdVg, IdVd, CV };

const char* sweep_kind_name(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s); // UnsupportedSweep on unknown

// One ramped terminal, one fixed bias. IdVg ramps the gate at fixed drain
// bias; IdVd ramps the drain at fixed gate bias; CV ramps the gate with a
// small-signal block.
struct SweepConfig {
    SweepKind kind = SweepKind::IdVg;
    double fixed_bias = 0.65; // V
    double start = 0.0;       // V
    double stop = 0.65;       // V
    double step = 0.01;       // V, > 0
};

// Throws InvalidSweep unless start < stop, step > 0 and the grid has >= 10
// points.
void validate_sweep(const SweepConfig& s);

int sweep_point_count(const SweepConfig& s);

// Evenly spaced, first element exactly `start`, last exactly `stop`.
std::vector<double> sweep_grid(const SweepConfig& s);

json sweep_to_json(const SweepConfig& s);
SweepConfig sweep_from_json(const json& j);

} // namespace nsopt
