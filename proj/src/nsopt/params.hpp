#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsopt/jsonutil.hpp"

namespace nsopt {

// ============================================================================
// Design vector
// ============================================================================

// All fields double; num_sheets carries an integral value once validated or
// clamped. Field declaration order is load-bearing: the coordinate search and
// variant expansion iterate in this order, and ties break toward earlier
// fields.
struct DesignParams {
    double gate_length = 14.0;      // nm
    double sheet_width = 25.0;      // nm
    double sheet_thickness = 5.0;   // nm
    double num_sheets = 3.0;        // stacked channels, integer >= 1
    double vertical_pitch = 10.0;   // nm, must exceed sheet_thickness
    double eot = 0.7;               // nm, equivalent oxide thickness
    double gate_workfunction = 4.6; // eV
    double channel_doping = 1e16;   // cm^-3
    double sd_doping = 1e20;        // cm^-3, must exceed channel_doping
    double spacer_length = 5.0;     // nm
    double vdd = 0.65;              // V

    bool operator==(const DesignParams&) const = default;
};

struct FieldDef {
    const char* name;
    double DesignParams::*member;
    const char* unit;
};

inline constexpr std::array<FieldDef, 11> kParamFields = {{
    {"gate_length", &DesignParams::gate_length, "nm"},
    {"sheet_width", &DesignParams::sheet_width, "nm"},
    {"sheet_thickness", &DesignParams::sheet_thickness, "nm"},
    {"num_sheets", &DesignParams::num_sheets, "count"},
    {"vertical_pitch", &DesignParams::vertical_pitch, "nm"},
    {"eot", &DesignParams::eot, "nm"},
    {"gate_workfunction", &DesignParams::gate_workfunction, "eV"},
    {"channel_doping", &DesignParams::channel_doping, "cm^-3"},
    {"sd_doping", &DesignParams::sd_doping, "cm^-3"},
    {"spacer_length", &DesignParams::spacer_length, "nm"},
    {"vdd", &DesignParams::vdd, "V"},
}};

int param_field_index(std::string_view name); // -1 if unknown

// Gate-all-around perimeter convention: metrics are normalized per um of
// effective width, num_sheets * 2 * (sheet_width + sheet_thickness).
double effective_width_um(const DesignParams& p);

// ============================================================================
// Search space
// ============================================================================

enum class Scale { Linear, Log10 };

struct FieldBounds {
    double lower = 0.0;
    double upper = 0.0;
    Scale scale = Scale::Linear;
    bool integer = false;
};

struct ParamSpace {
    std::array<FieldBounds, 11> fields{}; // aligned with kParamFields

    const FieldBounds& at(std::string_view name) const;
    FieldBounds& at(std::string_view name);
};

// Shipped bounds; the pitch lower bound sits above the thickness upper bound
// so every in-bounds point satisfies the stacking invariant.
ParamSpace default_param_space();

// ============================================================================
// Figure-of-merit targets
// ============================================================================

struct SpecTargets {
    double ss_max = 72.0;     // mV/dec
    double ioff_max = 1.0e-8; // A/um
    double ion_min = 7.87e-4; // A/um
    double onoff_min = 4.90;  // log10(ion/ioff)
    double vdd = 0.65;        // V
    double temperature = 300.0; // K
};

// Throws InvalidTargets. onoff_min may exceed log10(ion_min/ioff_max) by at
// most 0.01 (two-decimal print rounding of the published ratio).
void validate_targets(const SpecTargets& t);

// ============================================================================
// Validation and repair
// ============================================================================

struct Violation {
    std::string field;
    std::string message;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct ValidationResult {
    bool in_bounds = false;
    std::vector<Violation> violations;
};

// Bounds are inclusive. Also checks structural invariants: positive values,
// vertical_pitch > sheet_thickness, sd_doping > channel_doping, num_sheets
// integral >= 1.
ValidationResult validate(const DesignParams& p, const ParamSpace& space);

// Projects each field into bounds, rounds integer fields to the nearest
// in-range integer, then repairs structural pair invariants (raise pitch /
// sd_doping, else lower thickness / channel_doping). Idempotent. Throws
// UnrepairableParams when the space admits no valid point for the pair.
DesignParams clamp(const DesignParams& p, const ParamSpace& space);

// ============================================================================
// JSON (strict: all fields required, unknown fields are errors)
// ============================================================================

json params_to_json(const DesignParams& p);
DesignParams params_from_json(const json& j);

json space_to_json(const ParamSpace& s);
ParamSpace space_from_json(const json& j);

json targets_to_json(const SpecTargets& t);
SpecTargets targets_from_json(const json& j); // validates

} // namespace nsopt
