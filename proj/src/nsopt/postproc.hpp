#pragma once

#include <optional>

#include "nsopt/params.hpp"
#include "nsopt/surrogate.hpp"

namespace nsopt {

struct SpecVerdicts {
    bool ss_ok = false;
    bool ioff_ok = false;
    bool ion_ok = false;
    bool onoff_ok = false;
    bool meets_all = false;
};

struct PerformanceMetrics {
    double ion_a_per_um = 0.0;
    double ioff_a_per_um = 0.0;
    double ss_mv_dec = 0.0;
    double onoff_log10 = 0.0; // always log10(ion/ioff)
    std::optional<SpecVerdicts> verdicts;
};

// Figure-of-merit extraction from a transfer curve.
//   ioff = Id(vg = 0), ion = Id(vg = vdd); off-grid lookups interpolate
//   linearly in (vg, log10 id), exact grid hits are returned bit-for-bit.
//   SS = 1000 * min over the subthreshold window of (dvg / dlog10 id), the
//   window being points with id in [3*ioff, ion/30].
// Errors: RangeError (curve does not span 0..vdd within half a step, or
// iv.vd != vdd), DegenerateCurve (window below 3 points), NonMonotonic
// (current falls inside the window).
PerformanceMetrics extract_metrics(const IVCurve& iv, double vdd);

// Inclusive comparisons; boundary-equal values pass.
SpecVerdicts check_spec(const PerformanceMetrics& m, const SpecTargets& t);

PerformanceMetrics with_verdicts(PerformanceMetrics m, const SpecTargets& t);

// One self-contained result document (metrics + verdicts + full curve +
// band summaries). schemas/result.schema.json describes it; bands may be
// null (external backends produce no band data).
json package_results(const PerformanceMetrics& m, const IVCurve& iv, double w_eff_um,
                     const BandDiagram* bands_on = nullptr, const BandDiagram* bands_off = nullptr);

// Inverse of package_results for the metric fields; bit-exact round trip.
PerformanceMetrics load_results(const json& doc);

json verdicts_to_json(const SpecVerdicts& v);
SpecVerdicts verdicts_from_json(const json& j);

json metrics_to_json(const PerformanceMetrics& m);
PerformanceMetrics metrics_from_json(const json& j);

} // namespace nsopt
