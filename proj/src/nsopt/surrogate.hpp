#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nsopt/params.hpp"
#include "nsopt/sweep.hpp"

namespace nsopt {

// ============================================================================
// Analytic electrostatics surrogate for a gate-all-around nanosheet FET.
//
// Closed-form scale-length model: natural length lambda grows with the
// sheet/oxide cross-section, short-channel control degrades exponentially in
// gate_length/lambda (swing factor and DIBL), threshold follows workfunction
// and body doping, and the current interpolates smoothly between an exact
// exponential subthreshold and a saturated power law. Runs in microseconds,
// which is what makes the closed loop testable at desk scale.
// ============================================================================

namespace model {

// physical
inline constexpr double kBoltzmann = 1.380649e-23;          // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19; // C
inline constexpr double kTemperature = 300.0;                // K
inline constexpr double kThermalVoltage = kBoltzmann * kTemperature / kElementaryCharge; // V
inline constexpr double kLn10 = 2.302585092994046;
inline constexpr double kSsFloorMvDec = kThermalVoltage * kLn10 * 1e3; // 59.526 mV/dec
inline constexpr double kSiliconBandgapEv = 1.12;

// calibrated coefficients (see tools/nsopt_calibrate)
struct Coefficients {
    double lambda_coeff = 1.2;        // c1: lambda = c1*sqrt(thickness*eot), nm
    double swing_amplitude = 2.0;     // c2: n = 1 + c2*exp(-Lg/(2*lambda))
    double dibl_coeff = 3.0;          // c3: dVth = c3*exp(-Lg/lambda)*vd
    double vth_doping_coeff = 0.04;   // c4: V per decade of channel doping
    double workfunction_ref = 4.30;   // eV
    double channel_doping_ref = 1e16; // cm^-3
    double sub_prefactor = 1e-6;      // I0, A/um at vg = vth
    double on_coeff = 1e-2;           // k_on, A/um per V^alpha
    double on_exponent = 1.3;         // alpha
    double eot_ref = 0.7;             // nm, inversion-capacitance reference
    double series_coeff = 0.15;       // spacer/S-D series-resistance weight
    double spacer_ref = 5.0;          // nm
    double sd_doping_ref = 1e20;      // cm^-3
    // band profile
    double degeneracy_ev = 0.05;      // EFn above Ec in the n+ regions
    double barrier_zero = 0.55;       // eV, source barrier at vg = vth
    double barrier_gate_coupling = 0.8;
    double barrier_floor_ev = 0.03;   // residual on-state barrier
    double sd_extension_nm = 15.0;    // source/drain block length in the profile
};

inline constexpr Coefficients kDefault{};

// deterministic non-convergence rules
inline constexpr double kMinAspect = 2.0;         // gate_length >= 2*sheet_thickness
inline constexpr double kMinEotNm = 0.4;
inline constexpr double kMinDopingContrast = 10.0; // sd_doping/channel_doping

} // namespace model

// ============================================================================
// Outcome types
// ============================================================================

struct IVCurve {
    double vd = 0.0;          // V, fixed drain bias
    double temperature = 300; // K
    std::vector<double> vg;   // V, strictly increasing
    std::vector<double> id;   // A/um, finite, > 0
};

void check_iv_invariants(const IVCurve& c); // InvariantError on violation

struct BandDiagram {
    double vg = 0.0; // V
    double vd = 0.0; // V
    std::vector<double> x;   // um along source-channel-drain
    std::vector<double> ec;  // eV
    std::vector<double> ev;  // eV, ec - 1.12 everywhere
    std::vector<double> efn; // eV
    std::vector<double> efp; // eV
};

// max over the profile of Ec(x) - Ec(source)
double barrier_height_ev(const BandDiagram& b);

struct Converged {
    IVCurve iv;
    std::optional<BandDiagram> bands_on;  // absent for external backends
    std::optional<BandDiagram> bands_off;
};

struct NonConvergent {
    std::string diagnostic;
};

using SimulationOutcome = std::variant<Converged, NonConvergent>;

// ============================================================================
// Evaluation
// ============================================================================

// Diagnostic text when a deterministic non-convergence rule fires, otherwise
// empty. Rules: gate_length < 2*sheet_thickness (aspect), eot < 0.4 nm,
// sd_doping/channel_doping < 10.
std::optional<std::string> convergence_failure(const DesignParams& p);

// IdVg only; other kinds throw UnsupportedSweep. Never throws for a
// structurally valid design: rule violations come back as NonConvergent.
SimulationOutcome simulate_iv(const DesignParams& p, const SweepConfig& sweep);
SimulationOutcome simulate_iv_with(const model::Coefficients& c, const DesignParams& p, const SweepConfig& sweep);

BandDiagram band_diagram(const DesignParams& p, double vg, double vd);
BandDiagram band_diagram_with(const model::Coefficients& c, const DesignParams& p, double vg, double vd);

// Pointwise drain current, exposed for calibration and property tests.
double drain_current_a_per_um(const model::Coefficients& c, const DesignParams& p, double vg, double vd);
double threshold_voltage(const model::Coefficients& c, const DesignParams& p, double vd);
double swing_factor(const model::Coefficients& c, const DesignParams& p);

// ============================================================================
// Serialization
// ============================================================================

std::string iv_to_csv(const IVCurve& c);           // header "vg,id"
json iv_sidecar_json(const IVCurve& c, double w_eff_um);
std::string band_to_csv(const BandDiagram& b);      // header "x,ec,ev,efn,efp"

} // namespace nsopt
