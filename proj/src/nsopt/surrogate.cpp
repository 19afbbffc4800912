#include "nsopt/surrogate.hpp"

#include <algorithm>
#include <cmath>

namespace nsopt {

namespace {

using model::Coefficients;

// log(1 + exp(x)) without overflow; exact asymptotes both ways.
double softplus(double x) {
    if (x > 40.0) return x;
    if (x < -40.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

// Raised-cosine step from 0 at x0 to 1 at x1; C1 at both joints.
double smoothstep(double x, double x0, double x1) {
    if (x <= x0) return 0.0;
    if (x >= x1) return 1.0;
    double t = (x - x0) / (x1 - x0);
    return 0.5 - 0.5 * std::cos(t * M_PI);
}

struct Electro {
    double lambda_nm;
    double n_factor;     // swing factor, > 1
    double ss_v_per_dec; // n * Vt * ln10
    double dibl_v;
    double vth_v;
    double a_v;          // softplus knee width, alpha * n * Vt
    double cap_factor;   // eot_ref / eot
    double series_factor;
};

Electro electro(const Coefficients& c, const DesignParams& p, double vd) {
    Electro e;
    e.lambda_nm = c.lambda_coeff * std::sqrt(p.sheet_thickness * p.eot);
    e.n_factor = 1.0 + c.swing_amplitude * std::exp(-p.gate_length / (2.0 * e.lambda_nm));
    e.ss_v_per_dec = e.n_factor * model::kThermalVoltage * model::kLn10;
    e.dibl_v = c.dibl_coeff * std::exp(-p.gate_length / e.lambda_nm) * vd;
    e.vth_v = (p.gate_workfunction - c.workfunction_ref) +
              c.vth_doping_coeff * std::log10(p.channel_doping / c.channel_doping_ref) - e.dibl_v;
    e.a_v = c.on_exponent * e.n_factor * model::kThermalVoltage;
    e.cap_factor = c.eot_ref / p.eot;
    double series = c.series_coeff * (p.spacer_length / c.spacer_ref) * std::sqrt(c.sd_doping_ref / p.sd_doping);
    e.series_factor = 1.0 / (1.0 + series);
    return e;
}

// Sum of a capped subthreshold exponential and a softplus-overdrive power
// law. Both components share the subthreshold log-slope 1/(n*Vt), so the
// deep-subthreshold swing is exactly n*Vt*ln10 and the log-slope never
// exceeds it anywhere on the curve: extracted SS can only sit at or above
// the model swing, and the blend is C-infinity and strictly increasing.
double current(const Coefficients& c, const Electro& e, double vg) {
    double overdrive_eff = e.a_v * softplus((vg - e.vth_v) / e.a_v);
    double on = c.on_coeff * e.cap_factor * e.series_factor * std::pow(overdrive_eff, c.on_exponent);
    // smooth min(vg, vth): the exponential channel saturates at I0 above vth
    double sub_arg = -e.a_v * softplus((e.vth_v - vg) / e.a_v) / e.ss_v_per_dec;
    double sub = c.sub_prefactor * std::pow(10.0, sub_arg);
    // numerical floor; keeps id finite-positive and strictly increasing even
    // for absurd off-space inputs
    double floor = 1e-28 * (1.0 + vg);
    return on + sub + floor;
}

} // namespace

std::optional<std::string> convergence_failure(const DesignParams& p) {
    if (p.gate_length < model::kMinAspect * p.sheet_thickness)
        return "mesh aspect rule: gate_length " + format_double(p.gate_length) +
               " nm is below 2 x sheet_thickness (" + format_double(2.0 * p.sheet_thickness) +
               " nm); solver mesh collapses in the channel corners";
    if (p.eot < model::kMinEotNm)
        return "oxide discretization rule: eot " + format_double(p.eot) + " nm is below the " +
               format_double(model::kMinEotNm) + " nm floor; gate-leakage model diverges";
    if (p.sd_doping / p.channel_doping < model::kMinDopingContrast)
        return "junction contrast rule: sd_doping/channel_doping = " +
               format_double(p.sd_doping / p.channel_doping) +
               " is below 10; contact boundary condition fails to pin the quasi-Fermi level";
    return std::nullopt;
}

double swing_factor(const Coefficients& c, const DesignParams& p) {
    double lambda = c.lambda_coeff * std::sqrt(p.sheet_thickness * p.eot);
    return 1.0 + c.swing_amplitude * std::exp(-p.gate_length / (2.0 * lambda));
}

double threshold_voltage(const Coefficients& c, const DesignParams& p, double vd) {
    return electro(c, p, vd).vth_v;
}

double drain_current_a_per_um(const Coefficients& c, const DesignParams& p, double vg, double vd) {
    return current(c, electro(c, p, vd), vg);
}

SimulationOutcome simulate_iv_with(const Coefficients& c, const DesignParams& p, const SweepConfig& sweep) {
    if (sweep.kind != SweepKind::IdVg)
        fail(Errc::unsupported_sweep,
             std::string("surrogate solves idvg only, got '") + sweep_kind_name(sweep.kind) + "'");
    validate_sweep(sweep);
    if (auto diag = convergence_failure(p)) return NonConvergent{*diag};

    Electro e = electro(c, p, sweep.fixed_bias);
    IVCurve iv;
    iv.vd = sweep.fixed_bias;
    iv.temperature = model::kTemperature;
    iv.vg = sweep_grid(sweep);
    iv.id.reserve(iv.vg.size());
    for (double vg : iv.vg) iv.id.push_back(current(c, e, vg));
    check_iv_invariants(iv);

    Converged out;
    out.bands_off = band_diagram_with(c, p, 0.0, sweep.fixed_bias);
    out.bands_on = band_diagram_with(c, p, p.vdd, sweep.fixed_bias);
    out.iv = std::move(iv);
    return out;
}

SimulationOutcome simulate_iv(const DesignParams& p, const SweepConfig& sweep) {
    return simulate_iv_with(model::kDefault, p, sweep);
}

void check_iv_invariants(const IVCurve& c) {
    if (c.vg.size() != c.id.size()) fail(Errc::invariant_error, "vg/id length mismatch");
    if (c.vg.size() < 2) fail(Errc::invariant_error, "curve needs at least 2 points");
    for (std::size_t i = 0; i < c.vg.size(); ++i) {
        if (!std::isfinite(c.vg[i]) || !std::isfinite(c.id[i]))
            fail(Errc::invariant_error, "non-finite sample at point " + std::to_string(i));
        if (!(c.id[i] > 0.0)) fail(Errc::invariant_error, "id must be > 0 at point " + std::to_string(i));
        if (i > 0 && !(c.vg[i] > c.vg[i - 1]))
            fail(Errc::invariant_error, "vg must be strictly increasing at point " + std::to_string(i));
    }
}

// ---------------------------------------------------------------------------
// Band diagram: flat degenerate source/drain, smooth spacer transitions onto
// a channel barrier plateau. EFn steps by vd across the channel, EFp follows
// the source level and splits at the drain junction.
// ---------------------------------------------------------------------------

BandDiagram band_diagram_with(const Coefficients& c, const DesignParams& p, double vg, double vd) {
    constexpr int kSamples = 181;
    Electro e = electro(c, p, vd);

    double l_sd = c.sd_extension_nm;
    double l_total = p.gate_length + 2.0 * p.spacer_length + 2.0 * l_sd;
    double x_sp1 = l_sd;                        // source/spacer junction
    double x_ch = l_sd + p.spacer_length;       // spacer/channel junction
    double x_chr = x_ch + p.gate_length;        // channel/spacer junction
    double x_sp2 = x_chr + p.spacer_length;     // spacer/drain junction

    double ec_src = -c.degeneracy_ev;
    double ec_drn = -vd - c.degeneracy_ev;
    double phi = std::max(c.barrier_zero - c.barrier_gate_coupling * (vg - e.vth_v), c.barrier_floor_ev);
    double ec_chn = ec_src + phi;

    BandDiagram b;
    b.vg = vg;
    b.vd = vd;
    b.x.reserve(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        double x_nm = l_total * static_cast<double>(i) / (kSamples - 1);
        double ec;
        if (x_nm <= x_sp1) ec = ec_src;
        else if (x_nm <= x_ch) ec = ec_src + (ec_chn - ec_src) * smoothstep(x_nm, x_sp1, x_ch);
        else if (x_nm <= x_chr) ec = ec_chn;
        else if (x_nm <= x_sp2) ec = ec_chn + (ec_drn - ec_chn) * smoothstep(x_nm, x_chr, x_sp2);
        else ec = ec_drn;

        double efn = -vd * smoothstep(x_nm, x_ch, x_chr);
        double efp = -vd * smoothstep(x_nm, x_chr, x_sp2 + p.spacer_length);

        b.x.push_back(x_nm * 1e-3);
        b.ec.push_back(ec);
        b.ev.push_back(ec - model::kSiliconBandgapEv);
        b.efn.push_back(efn);
        b.efp.push_back(efp);
    }
    return b;
}

BandDiagram band_diagram(const DesignParams& p, double vg, double vd) {
    return band_diagram_with(model::kDefault, p, vg, vd);
}

double barrier_height_ev(const BandDiagram& b) {
    double peak = *std::max_element(b.ec.begin(), b.ec.end());
    return peak - b.ec.front();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string iv_to_csv(const IVCurve& c) {
    std::string out = "vg,id\n";
    for (std::size_t i = 0; i < c.vg.size(); ++i) {
        out += format_double(c.vg[i]);
        out.push_back(',');
        out += format_double(c.id[i]);
        out.push_back('\n');
    }
    return out;
}

json iv_sidecar_json(const IVCurve& c, double w_eff_um) {
    json j = json::object();
    j["vd"] = c.vd;
    j["temperature"] = c.temperature;
    j["w_eff_um"] = w_eff_um;
    j["points"] = c.vg.size();
    return j;
}

std::string band_to_csv(const BandDiagram& b) {
    std::string out = "x,ec,ev,efn,efp\n";
    for (std::size_t i = 0; i < b.x.size(); ++i) {
        out += format_double(b.x[i]);
        out.push_back(',');
        out += format_double(b.ec[i]);
        out.push_back(',');
        out += format_double(b.ev[i]);
        out.push_back(',');
        out += format_double(b.efn[i]);
        out.push_back(',');
        out += format_double(b.efp[i]);
        out.push_back('\n');
    }
    return out;
}

} // namespace nsopt
