#pragma once

#include <string>
#include <vector>

#include "nsopt/params.hpp"
#include "nsopt/record.hpp"
#include "nsopt/surrogate.hpp"

namespace nsopt {

// Per-iteration figures of merit, one row per record; non-converged rows
// keep the iteration and leave the metric cells empty.
std::string trajectory_csv(const std::vector<IterationRecord>& records);

// Four panels (swing, off-current, on-current, on/off ratio) against the
// iteration index, dashed line at each target, markers at every converged
// iteration and line gaps plus a cross where the solver gave up.
std::string trajectory_svg(const std::vector<IterationRecord>& records, const SpecTargets& targets);

// Transfer curve on a log current axis: one polyline vertex per sample.
std::string iv_svg(const IVCurve& iv);

// Band-edge and quasi-Fermi profiles along the transport direction.
std::string bands_svg(const BandDiagram& b);

// Renders a run directory's plots into out_dir (empty = <run_dir>/plots):
// always the trajectory CSV/SVG; when a plottable iteration exists
// (iteration -1 picks the best recorded one) also its transfer curve, and
// its band profiles when the run used the built-in solver. Returns the
// written paths.
std::vector<std::string> plot_run(const std::string& run_dir, const std::string& out_dir,
                                  int iteration);

} // namespace nsopt
