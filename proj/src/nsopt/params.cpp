#include "nsopt/params.hpp"

#include <algorithm>
#include <cmath>

namespace nsopt {

namespace {

constexpr double kIntegerTol = 1e-9;
// Slack on the onoff consistency check: the published minimum ratio is the
// two-decimal rounding of log10(ion_min/ioff_max).
constexpr double kOnoffRoundingSlack = 0.01;

bool is_integral(double v) { return std::fabs(v - std::round(v)) <= kIntegerTol; }

} // namespace

int param_field_index(std::string_view name) {
    for (std::size_t i = 0; i < kParamFields.size(); ++i)
        if (name == kParamFields[i].name) return static_cast<int>(i);
    return -1;
}

double effective_width_um(const DesignParams& p) {
    return p.num_sheets * 2.0 * (p.sheet_width + p.sheet_thickness) * 1e-3;
}

const FieldBounds& ParamSpace::at(std::string_view name) const {
    int i = param_field_index(name);
    if (i < 0) fail(Errc::invalid_params, "unknown parameter '" + std::string(name) + "'");
    return fields[static_cast<std::size_t>(i)];
}

FieldBounds& ParamSpace::at(std::string_view name) {
    int i = param_field_index(name);
    if (i < 0) fail(Errc::invalid_params, "unknown parameter '" + std::string(name) + "'");
    return fields[static_cast<std::size_t>(i)];
}

ParamSpace default_param_space() {
    ParamSpace s;
    s.at("gate_length") = {8.0, 25.0, Scale::Linear, false};
    s.at("sheet_width") = {15.0, 40.0, Scale::Linear, false};
    s.at("sheet_thickness") = {4.0, 8.0, Scale::Linear, false};
    s.at("num_sheets") = {1.0, 5.0, Scale::Linear, true};
    s.at("vertical_pitch") = {9.0, 20.0, Scale::Linear, false};
    s.at("eot") = {0.5, 1.5, Scale::Linear, false};
    s.at("gate_workfunction") = {4.3, 5.0, Scale::Linear, false};
    s.at("channel_doping") = {1e15, 1e18, Scale::Log10, false};
    s.at("sd_doping") = {5e19, 5e20, Scale::Log10, false};
    s.at("spacer_length") = {3.0, 10.0, Scale::Linear, false};
    s.at("vdd") = {0.6, 0.7, Scale::Linear, false};
    return s;
}

void validate_targets(const SpecTargets& t) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            fail(Errc::invalid_targets, std::string(name) + " must be strictly positive");
    };
    positive(t.ss_max, "ss_max");
    positive(t.ioff_max, "ioff_max");
    positive(t.ion_min, "ion_min");
    positive(t.onoff_min, "onoff_min");
    positive(t.vdd, "vdd");
    positive(t.temperature, "temperature");
    double achievable = std::log10(t.ion_min / t.ioff_max);
    if (t.onoff_min > achievable + kOnoffRoundingSlack)
        fail(Errc::invalid_targets,
             "onoff_min " + format_double(t.onoff_min) + " inconsistent with log10(ion_min/ioff_max) = " +
                 format_double(achievable));
}

ValidationResult validate(const DesignParams& p, const ParamSpace& space) {
    ValidationResult r;
    for (std::size_t i = 0; i < kParamFields.size(); ++i) {
        const auto& f = kParamFields[i];
        const auto& b = space.fields[i];
        double v = p.*(f.member);
        if (!std::isfinite(v)) {
            r.violations.push_back({f.name, "not finite", v, b.lower, b.upper});
            continue;
        }
        if (v < b.lower || v > b.upper) {
            r.violations.push_back({f.name,
                                    "outside [" + format_double(b.lower) + ", " + format_double(b.upper) + "]", v,
                                    b.lower, b.upper});
        }
        if (v <= 0.0)
            r.violations.push_back({f.name, "must be strictly positive", v, b.lower, b.upper});
        if (b.integer && !is_integral(v))
            r.violations.push_back({f.name, "must be an integer", v, b.lower, b.upper});
    }
    if (p.num_sheets < 1.0 - kIntegerTol) {
        const auto& b = space.at("num_sheets");
        r.violations.push_back({"num_sheets", "must be >= 1", p.num_sheets, b.lower, b.upper});
    }
    if (!(p.vertical_pitch > p.sheet_thickness)) {
        const auto& b = space.at("vertical_pitch");
        r.violations.push_back({"vertical_pitch", "must exceed sheet_thickness", p.vertical_pitch, b.lower, b.upper});
    }
    if (!(p.sd_doping > p.channel_doping)) {
        const auto& b = space.at("sd_doping");
        r.violations.push_back({"sd_doping", "must exceed channel_doping", p.sd_doping, b.lower, b.upper});
    }
    r.in_bounds = r.violations.empty();
    return r;
}

DesignParams clamp(const DesignParams& p, const ParamSpace& space) {
    DesignParams out = p;
    for (std::size_t i = 0; i < kParamFields.size(); ++i) {
        const auto& f = kParamFields[i];
        const auto& b = space.fields[i];
        double v = out.*(f.member);
        if (std::isnan(v)) fail(Errc::unrepairable_params, std::string(f.name) + " is NaN");
        // Log-space projection onto [lower, upper] coincides with projection
        // on the raw value; no special casing needed.
        v = std::clamp(v, b.lower, b.upper);
        if (b.integer) {
            v = std::round(v);
            v = std::clamp(v, std::ceil(b.lower - kIntegerTol), std::floor(b.upper + kIntegerTol));
        }
        out.*(f.member) = v;
    }

    // Pair invariant: vertical_pitch > sheet_thickness. Prefer raising pitch;
    // when even the pitch cap is not enough, pin pitch there and thin the
    // sheet, so repair only fails when the bounds truly admit no valid pair.
    if (!(out.vertical_pitch > out.sheet_thickness)) {
        const auto& bp = space.at("vertical_pitch");
        double want = std::nextafter(out.sheet_thickness, std::numeric_limits<double>::infinity());
        if (want <= bp.upper) {
            out.vertical_pitch = std::max(want, bp.lower);
        } else {
            const auto& bt = space.at("sheet_thickness");
            out.vertical_pitch = bp.upper;
            double thinner = std::nextafter(out.vertical_pitch, 0.0);
            if (thinner >= bt.lower) {
                out.sheet_thickness = std::min(thinner, bt.upper);
            } else {
                fail(Errc::unrepairable_params,
                     "vertical_pitch/sheet_thickness bounds admit no stacking-valid point");
            }
        }
    }

    // Pair invariant: sd_doping > channel_doping, repaired the same way.
    if (!(out.sd_doping > out.channel_doping)) {
        const auto& bs = space.at("sd_doping");
        double want = std::nextafter(out.channel_doping, std::numeric_limits<double>::infinity());
        if (want <= bs.upper) {
            out.sd_doping = std::max(want, bs.lower);
        } else {
            const auto& bc = space.at("channel_doping");
            out.sd_doping = bs.upper;
            double lower = std::nextafter(out.sd_doping, 0.0);
            if (lower >= bc.lower) {
                out.channel_doping = std::min(lower, bc.upper);
            } else {
                fail(Errc::unrepairable_params, "sd_doping/channel_doping bounds admit no valid contrast");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json params_to_json(const DesignParams& p) {
    json j = json::object();
    for (const auto& f : kParamFields) j[f.name] = p.*(f.member);
    return j;
}

DesignParams params_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::parse_error, "design parameters must be a JSON object");
    DesignParams p;
    for (const auto& f : kParamFields) {
        auto it = j.find(f.name);
        if (it == j.end())
            fail(Errc::schema_error, std::string("missing required field '") + f.name + "'");
        if (!it->is_number())
            fail(Errc::schema_error, std::string("field '") + f.name + "' must be a number");
        p.*(f.member) = it->get<double>();
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (param_field_index(it.key()) < 0)
            fail(Errc::schema_error, "unknown field '" + it.key() + "'");
    }
    return p;
}

json space_to_json(const ParamSpace& s) {
    json j = json::object();
    for (std::size_t i = 0; i < kParamFields.size(); ++i) {
        const auto& b = s.fields[i];
        json e = json::object();
        e["lower"] = b.lower;
        e["upper"] = b.upper;
        e["scale"] = b.scale == Scale::Log10 ? "log10" : "linear";
        if (b.integer) e["integer"] = true;
        j[kParamFields[i].name] = e;
    }
    return j;
}

ParamSpace space_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::parse_error, "parameter space must be a JSON object");
    ParamSpace s;
    for (std::size_t i = 0; i < kParamFields.size(); ++i) {
        const char* name = kParamFields[i].name;
        auto it = j.find(name);
        if (it == j.end()) fail(Errc::schema_error, std::string("space missing field '") + name + "'");
        const json& e = *it;
        FieldBounds b;
        if (!e.contains("lower") || !e.contains("upper"))
            fail(Errc::schema_error, std::string("space field '") + name + "' needs lower and upper");
        b.lower = e.at("lower").get<double>();
        b.upper = e.at("upper").get<double>();
        std::string scale = e.value("scale", "linear");
        if (scale == "log10") b.scale = Scale::Log10;
        else if (scale == "linear") b.scale = Scale::Linear;
        else fail(Errc::schema_error, std::string("space field '") + name + "': unknown scale '" + scale + "'");
        b.integer = e.value("integer", false);
        if (!(b.lower < b.upper))
            fail(Errc::invalid_params, std::string("space field '") + name + "': lower must be < upper");
        if (b.scale == Scale::Log10 && !(b.lower > 0.0))
            fail(Errc::invalid_params, std::string("space field '") + name + "': log10 scale needs positive bounds");
        s.fields[i] = b;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (param_field_index(it.key()) < 0)
            fail(Errc::schema_error, "space has unknown field '" + it.key() + "'");
    }
    return s;
}

json targets_to_json(const SpecTargets& t) {
    json j = json::object();
    j["ss_max"] = t.ss_max;
    j["ioff_max"] = t.ioff_max;
    j["ion_min"] = t.ion_min;
    j["onoff_min"] = t.onoff_min;
    j["vdd"] = t.vdd;
    j["temperature"] = t.temperature;
    return j;
}

SpecTargets targets_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::parse_error, "targets must be a JSON object");
    SpecTargets t;
    t.ss_max = j.value("ss_max", t.ss_max);
    t.ioff_max = j.value("ioff_max", t.ioff_max);
    t.ion_min = j.value("ion_min", t.ion_min);
    t.onoff_min = j.value("onoff_min", t.onoff_min);
    t.vdd = j.value("vdd", t.vdd);
    t.temperature = j.value("temperature", t.temperature);
    validate_targets(t);
    return t;
}

} // namespace nsopt
