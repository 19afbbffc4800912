#include "nsopt/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsopt {

namespace {

// Id at vg = target. Exact grid hits short-circuit so the value round-trips
// bit-for-bit; otherwise interpolate in (vg, log10 id) space, extrapolating
// from the nearest segment when target sits within the half-step guard band.
double current_at(const IVCurve& iv, double target) {
    for (std::size_t i = 0; i < iv.vg.size(); ++i)
        if (iv.vg[i] == target) return iv.id[i];
    std::size_t hi = iv.vg.size() - 1;
    for (std::size_t i = 1; i < iv.vg.size(); ++i) {
        if (iv.vg[i] >= target) {
            hi = i;
            break;
        }
    }
    std::size_t lo = hi - 1;
    double t = (target - iv.vg[lo]) / (iv.vg[hi] - iv.vg[lo]);
    double lg = std::log10(iv.id[lo]) + t * (std::log10(iv.id[hi]) - std::log10(iv.id[lo]));
    return std::pow(10.0, lg);
}

double median_step(const IVCurve& iv) {
    std::vector<double> steps;
    steps.reserve(iv.vg.size() - 1);
    for (std::size_t i = 1; i < iv.vg.size(); ++i) steps.push_back(iv.vg[i] - iv.vg[i - 1]);
    std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
    return steps[steps.size() / 2];
}

} // namespace

PerformanceMetrics extract_metrics(const IVCurve& iv, double vdd) {
    check_iv_invariants(iv);
    if (std::fabs(iv.vd - vdd) > 1e-9)
        fail(Errc::range_error,
             "curve drain bias " + format_double(iv.vd) + " does not match vdd " + format_double(vdd));
    double half_step = 0.5 * median_step(iv);
    if (iv.vg.front() > 0.0 + half_step || iv.vg.back() < vdd - half_step)
        fail(Errc::range_error, "curve spans [" + format_double(iv.vg.front()) + ", " +
                                    format_double(iv.vg.back()) + "] V, need 0.." + format_double(vdd));

    PerformanceMetrics m;
    m.ioff_a_per_um = current_at(iv, 0.0);
    m.ion_a_per_um = current_at(iv, vdd);

    double lo_id = 3.0 * m.ioff_a_per_um;
    double hi_id = m.ion_a_per_um / 30.0;
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < iv.id.size(); ++i)
        if (iv.id[i] >= lo_id && iv.id[i] <= hi_id) window.push_back(i);
    if (window.size() < 3)
        fail(Errc::degenerate_curve, "subthreshold window [3*ioff, ion/30] holds " +
                                         std::to_string(window.size()) + " points, need 3");

    double ss_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < window.size(); ++k) {
        std::size_t a = window[k - 1], b = window[k];
        if (b != a + 1) continue; // swings are defined between adjacent samples
        double dlog = std::log10(iv.id[b]) - std::log10(iv.id[a]);
        if (dlog < 0.0)
            fail(Errc::non_monotonic, "current falls between vg = " + format_double(iv.vg[a]) + " and " +
                                          format_double(iv.vg[b]) + " V inside the subthreshold window");
        if (dlog == 0.0) continue; // flat pair: swing undefined, never the minimum
        ss_min = std::min(ss_min, (iv.vg[b] - iv.vg[a]) / dlog * 1e3);
    }
    if (!std::isfinite(ss_min))
        fail(Errc::degenerate_curve, "no finite local swing inside the subthreshold window");

    m.ss_mv_dec = ss_min;
    m.onoff_log10 = std::log10(m.ion_a_per_um / m.ioff_a_per_um);
    return m;
}

SpecVerdicts check_spec(const PerformanceMetrics& m, const SpecTargets& t) {
    SpecVerdicts v;
    v.ss_ok = m.ss_mv_dec <= t.ss_max;
    v.ioff_ok = m.ioff_a_per_um <= t.ioff_max;
    v.ion_ok = m.ion_a_per_um >= t.ion_min;
    v.onoff_ok = m.onoff_log10 >= t.onoff_min;
    v.meets_all = v.ss_ok && v.ioff_ok && v.ion_ok && v.onoff_ok;
    return v;
}

PerformanceMetrics with_verdicts(PerformanceMetrics m, const SpecTargets& t) {
    m.verdicts = check_spec(m, t);
    return m;
}

json verdicts_to_json(const SpecVerdicts& v) {
    json j = json::object();
    j["ss"] = v.ss_ok;
    j["ioff"] = v.ioff_ok;
    j["ion"] = v.ion_ok;
    j["onoff"] = v.onoff_ok;
    j["meets_all"] = v.meets_all;
    return j;
}

SpecVerdicts verdicts_from_json(const json& j) {
    SpecVerdicts v;
    v.ss_ok = j.at("ss").get<bool>();
    v.ioff_ok = j.at("ioff").get<bool>();
    v.ion_ok = j.at("ion").get<bool>();
    v.onoff_ok = j.at("onoff").get<bool>();
    v.meets_all = j.at("meets_all").get<bool>();
    return v;
}

json metrics_to_json(const PerformanceMetrics& m) {
    json j = json::object();
    j["ion_a_per_um"] = m.ion_a_per_um;
    j["ioff_a_per_um"] = m.ioff_a_per_um;
    j["ss_mv_dec"] = m.ss_mv_dec;
    j["onoff_log10"] = m.onoff_log10;
    if (m.verdicts) j["verdicts"] = verdicts_to_json(*m.verdicts);
    return j;
}

PerformanceMetrics metrics_from_json(const json& j) {
    PerformanceMetrics m;
    m.ion_a_per_um = j.at("ion_a_per_um").get<double>();
    m.ioff_a_per_um = j.at("ioff_a_per_um").get<double>();
    m.ss_mv_dec = j.at("ss_mv_dec").get<double>();
    m.onoff_log10 = j.at("onoff_log10").get<double>();
    if (j.contains("verdicts") && !j.at("verdicts").is_null()) m.verdicts = verdicts_from_json(j.at("verdicts"));
    return m;
}

json package_results(const PerformanceMetrics& m, const IVCurve& iv, double w_eff_um,
                     const BandDiagram* bands_on, const BandDiagram* bands_off) {
    json doc = json::object();
    doc["schema_version"] = 1;
    doc["ion_a_per_um"] = m.ion_a_per_um;
    doc["ioff_a_per_um"] = m.ioff_a_per_um;
    doc["ss_mv_dec"] = m.ss_mv_dec;
    doc["onoff_log10"] = m.onoff_log10;
    doc["verdicts"] = m.verdicts ? verdicts_to_json(*m.verdicts) : json();
    json curve = json::object();
    curve["vd"] = iv.vd;
    curve["temperature"] = iv.temperature;
    curve["w_eff_um"] = w_eff_um;
    json pts = json::array();
    for (std::size_t i = 0; i < iv.vg.size(); ++i) pts.push_back(json::array({iv.vg[i], iv.id[i]}));
    curve["points"] = std::move(pts);
    doc["iv"] = std::move(curve);
    if (bands_on && bands_off) {
        json b = json::object();
        b["on"] = json::object({{"vg", bands_on->vg}, {"barrier_ev", barrier_height_ev(*bands_on)}});
        b["off"] = json::object({{"vg", bands_off->vg}, {"barrier_ev", barrier_height_ev(*bands_off)}});
        doc["bands"] = std::move(b);
    } else {
        doc["bands"] = nullptr;
    }
    return doc;
}

PerformanceMetrics load_results(const json& doc) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        fail(Errc::parse_error, "result document missing schema_version");
    PerformanceMetrics m;
    m.ion_a_per_um = doc.at("ion_a_per_um").get<double>();
    m.ioff_a_per_um = doc.at("ioff_a_per_um").get<double>();
    m.ss_mv_dec = doc.at("ss_mv_dec").get<double>();
    m.onoff_log10 = doc.at("onoff_log10").get<double>();
    if (doc.contains("verdicts") && !doc.at("verdicts").is_null())
        m.verdicts = verdicts_from_json(doc.at("verdicts"));
    return m;
}

} // namespace nsopt
