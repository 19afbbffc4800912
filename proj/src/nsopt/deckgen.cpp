#include "nsopt/deckgen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "nsopt/errors.hpp"
#include "nsopt/jsonutil.hpp"
#include "nsopt/rng.hpp"

namespace nsopt {

namespace {

// Source/drain pad length along transport, nm. Matches the contact extensions
// assumed elsewhere in the pipeline.
constexpr double kSdExtensionNm = 15.0;

// Gate metal shell thickness around the oxide, nm. Cosmetic for meshing.
constexpr double kGateMetalNm = 3.0;

constexpr std::size_t kMaxVariants = 100000;

std::string num(double v) { return format_double(v); }

void put(std::string& s, const std::string& text) {
    s += text;
    s += '\n';
}

void define(std::string& s, const char* name, double v) {
    s += "(define ";
    s += name;
    s += ' ';
    s += num(v);
    s += ")\n";
}

std::string cuboid(double x0, double y0, double z0, double x1, double y1, double z1,
                   const std::string& material, const std::string& region) {
    std::string s = "(sdegeo:create-cuboid (position " + num(x0) + " " + num(y0) + " " + num(z0) +
                    ") (position " + num(x1) + " " + num(y1) + " " + num(z1) + ") \"" + material + "\" \"" +
                    region + "\")";
    return s;
}

} // namespace

const char* mesh_tag_name(MeshTag m) {
    switch (m) {
    case MeshTag::Coarse: return "coarse";
    case MeshTag::Default: return "default";
    case MeshTag::Fine: return "fine";
    }
    fail(Errc::internal_error, "bad mesh tag");
}

MeshTag mesh_tag_from_string(const std::string& s) {
    if (s == "coarse") return MeshTag::Coarse;
    if (s == "default") return MeshTag::Default;
    if (s == "fine") return MeshTag::Fine;
    fail(Errc::config_error, "unknown mesh tag '" + s + "' (expected coarse, default or fine)");
}

const char* models_tag_name(ModelsTag m) {
    switch (m) {
    case ModelsTag::DriftDiffusion: return "dd";
    case ModelsTag::DriftDiffusionQuantum: return "dd-quantum";
    }
    fail(Errc::internal_error, "bad models tag");
}

ModelsTag models_tag_from_string(const std::string& s) {
    if (s == "dd") return ModelsTag::DriftDiffusion;
    if (s == "dd-quantum") return ModelsTag::DriftDiffusionQuantum;
    fail(Errc::config_error, "unknown models tag '" + s + "' (expected dd or dd-quantum)");
}

std::string generate_sde(const DesignParams& p, MeshTag mesh) {
    // Out-of-space values are still emittable; only structural nonsense is not.
    for (const FieldDef& f : kParamFields)
        if (!std::isfinite(p.*(f.member)) || p.*(f.member) <= 0.0)
            fail(Errc::invalid_params,
                 std::string("cannot emit structure script: ") + f.name + " must be finite and positive");
    if (p.num_sheets < 1.0 || p.num_sheets != std::llround(p.num_sheets))
        fail(Errc::invalid_params, "cannot emit structure script: num_sheets must be a positive integer");
    if (!(p.vertical_pitch > p.sheet_thickness))
        fail(Errc::invalid_params,
             "cannot emit structure script: vertical_pitch must exceed sheet_thickness");

    const int n = static_cast<int>(std::llround(p.num_sheets));
    const double hw = p.sheet_width / 2.0;
    const double span = 2.0 * p.spacer_length + p.gate_length; // sheet length between pads
    const double x_src0 = 0.0;
    const double x_src1 = kSdExtensionNm;
    const double x_drn0 = kSdExtensionNm + span;
    const double x_drn1 = x_drn0 + kSdExtensionNm;
    const double x_g0 = kSdExtensionNm + p.spacer_length;
    const double x_g1 = x_g0 + p.gate_length;
    const double stack = (n - 1) * p.vertical_pitch + p.sheet_thickness;
    const double ox = p.eot;
    const double shell = ox + kGateMetalNm;

    // Channel refinement spacing: quarter, sixth or eighth of the sheet
    // thickness. Everything else in the script is tag-independent.
    double h = p.sheet_thickness / 6.0;
    if (mesh == MeshTag::Coarse) h = p.sheet_thickness / 4.0;
    if (mesh == MeshTag::Fine) h = p.sheet_thickness / 8.0;

    std::string s;
    put(s, "; Stacked nanosheet structure script (lengths nm, dopings cm^-3, voltages V)");
    put(s, "");
    define(s, "gate_length", p.gate_length);
    define(s, "sheet_width", p.sheet_width);
    define(s, "sheet_thickness", p.sheet_thickness);
    define(s, "num_sheets", p.num_sheets);
    define(s, "vertical_pitch", p.vertical_pitch);
    define(s, "eot", p.eot);
    define(s, "gate_workfunction", p.gate_workfunction);
    define(s, "channel_doping", p.channel_doping);
    define(s, "sd_doping", p.sd_doping);
    define(s, "spacer_length", p.spacer_length);
    define(s, "vdd", p.vdd);
    put(s, "");
    put(s, "(sdegeo:set-default-boolean \"ABA\")");
    put(s, "");
    put(s, "; source and drain pads spanning the full stack");
    put(s, cuboid(x_src0, -hw, 0.0, x_src1, hw, stack, "Silicon", "source_pad"));
    put(s, cuboid(x_drn0, -hw, 0.0, x_drn1, hw, stack, "Silicon", "drain_pad"));
    put(s, "");
    put(s, "; gate stack: metal shell, then oxide, then the channel sheets cut through both");
    put(s, cuboid(x_g0, -hw - shell, -shell, x_g1, hw + shell, stack + shell, "TiNitride", "gate_metal"));
    put(s, cuboid(x_g0, -hw - ox, -ox, x_g1, hw + ox, stack + ox, "SiO2", "gate_oxide"));
    put(s, "");
    put(s, "; spacers between gate and pads");
    put(s, cuboid(x_src1, -hw - shell, -shell, x_g0, hw + shell, stack + shell, "Si3N4", "spacer_src"));
    put(s, cuboid(x_g1, -hw - shell, -shell, x_drn0, hw + shell, stack + shell, "Si3N4", "spacer_drn"));
    put(s, "");
    put(s, "; stacked channel sheets, pad to pad");
    for (int i = 1; i <= n; ++i) {
        double z0 = (i - 1) * p.vertical_pitch;
        put(s, cuboid(x_src1, -hw, z0, x_drn0, hw, z0 + p.sheet_thickness, "Silicon",
                      "channel_sheet_" + std::to_string(i)));
    }
    put(s, "");
    put(s, "; doping");
    put(s, "(sdedr:define-constant-profile \"dop_channel\" \"BoronActiveConcentration\" " +
               num(p.channel_doping) + ")");
    for (int i = 1; i <= n; ++i) {
        std::string idx = std::to_string(i);
        put(s, "(sdedr:define-constant-profile-region \"place_dop_channel_" + idx +
                   "\" \"dop_channel\" \"channel_sheet_" + idx + "\")");
    }
    put(s, "(sdedr:define-constant-profile \"dop_sd\" \"PhosphorusActiveConcentration\" " + num(p.sd_doping) +
               ")");
    put(s, "(sdedr:define-constant-profile-region \"place_dop_source\" \"dop_sd\" \"source_pad\")");
    put(s, "(sdedr:define-constant-profile-region \"place_dop_drain\" \"dop_sd\" \"drain_pad\")");
    put(s, "");
    put(s, "; contacts");
    put(s, "(sdegeo:define-contact-set \"source\" 4 (color:rgb 1 0 0) \"##\")");
    put(s, "(sdegeo:define-contact-set \"drain\" 4 (color:rgb 0 1 0) \"##\")");
    put(s, "(sdegeo:define-contact-set \"gate\" 4 (color:rgb 0 0 1) \"##\")");
    put(s, "(sdegeo:set-contact-boundary-faces (find-body-id (position " + num(kSdExtensionNm / 2.0) + " 0 " +
               num(stack / 2.0) + ")) \"source\")");
    put(s, "(sdegeo:set-contact-boundary-faces (find-body-id (position " + num(x_drn0 + kSdExtensionNm / 2.0) +
               " 0 " + num(stack / 2.0) + ")) \"drain\")");
    put(s, "(sdegeo:set-contact-boundary-faces (find-body-id (position " + num((x_g0 + x_g1) / 2.0) + " 0 " +
               num(stack + ox + kGateMetalNm / 2.0) + ")) \"gate\")");
    put(s, "");
    put(s, "; mesh refinement");
    put(s, "(sdedr:define-refinement-size \"ref_global\" " + num(4.0 * h) + " " + num(4.0 * h) + " " +
               num(4.0 * h) + " " + num(h) + " " + num(h) + " " + num(h) + ")");
    put(s, "(sdedr:define-refinement-material \"place_ref_global\" \"ref_global\" \"Silicon\")");
    put(s, "(sdedr:define-refeval-window \"channel_box\" \"Cuboid\" (position " + num(x_g0) + " " + num(-hw) +
               " 0) (position " + num(x_g1) + " " + num(hw) + " " + num(stack) + "))");
    put(s, "(sdedr:define-refinement-size \"ref_channel\" " + num(h) + " " + num(h) + " " + num(h) + " " +
               num(h / 2.0) + " " + num(h / 2.0) + " " + num(h / 2.0) + ")");
    put(s, "(sdedr:define-refinement-placement \"place_ref_channel\" \"ref_channel\" \"channel_box\")");
    put(s, "");
    put(s, "(sde:build-mesh \"snmesh\" \"\" \"nsfet_msh\")");
    return s;
}

std::string generate_sdevice(const DesignParams& p, const SweepConfig& sweep, ModelsTag models) {
    validate_sweep(sweep);
    const int points = sweep_point_count(sweep);
    const int intervals = points - 1;
    const bool quantum = models == ModelsTag::DriftDiffusionQuantum;
    const std::string qword = quantum ? " eQuantumPotential" : "";
    const std::string ramp_step = num(1.0 / intervals);

    std::string s;
    put(s, "* Device command file for a stacked nanosheet transistor");
    for (const FieldDef& f : kParamFields)
        put(s, std::string("* param ") + f.name + " = " + num(p.*(f.member)));
    switch (sweep.kind) {
    case SweepKind::IdVg:
        put(s, "* sweep idvg: gate from " + num(sweep.start) + " V to " + num(sweep.stop) + " V, " +
                   std::to_string(points) + " points; drain held at " + num(sweep.fixed_bias) + " V");
        break;
    case SweepKind::IdVd:
        put(s, "* sweep idvd: drain from " + num(sweep.start) + " V to " + num(sweep.stop) + " V, " +
                   std::to_string(points) + " points; gate held at " + num(sweep.fixed_bias) + " V");
        break;
    case SweepKind::CV:
        put(s, "* sweep cv: gate from " + num(sweep.start) + " V to " + num(sweep.stop) + " V, " +
                   std::to_string(points) + " points; small-signal with drain at " + num(sweep.fixed_bias) +
                   " V");
        break;
    }
    put(s, "");
    put(s, "File {");
    put(s, "   Grid    = \"nsfet_msh.tdr\"");
    put(s, "   Plot    = \"nsfet_des.tdr\"");
    put(s, "   Current = \"nsfet_des.plt\"");
    put(s, "   Output  = \"nsfet_des.log\"");
    put(s, "}");
    put(s, "");
    put(s, "Electrode {");
    put(s, "   { Name=\"source\" Voltage=0 }");
    put(s, "   { Name=\"drain\"  Voltage=0 }");
    put(s, "   { Name=\"gate\"   Voltage=0 Workfunction=" + num(p.gate_workfunction) + " }");
    put(s, "}");
    put(s, "");
    put(s, "Physics {");
    put(s, "   Temperature=300");
    if (quantum) put(s, "   eQuantumPotential");
    put(s, "   Mobility( DopingDependence HighFieldSaturation Enormal )");
    put(s, "   EffectiveIntrinsicDensity( BandGapNarrowing(OldSlotboom) )");
    put(s, "   Recombination( SRH(DopingDependence) Auger )");
    put(s, "}");
    put(s, "");
    put(s, "Plot {");
    put(s, "   eDensity hDensity eCurrent hCurrent");
    put(s, "   ElectricField Potential SpaceCharge");
    put(s, "   eQuasiFermi hQuasiFermi");
    put(s, "   DopingConcentration DonorConcentration AcceptorConcentration");
    put(s, "   BandGap ConductionBandEnergy ValenceBandEnergy");
    put(s, "}");
    put(s, "");
    put(s, "Math {");
    put(s, "   Extrapolate");
    put(s, "   RelErrControl");
    put(s, "   Iterations=15");
    put(s, "   Notdamped=50");
    put(s, "   Method=Pardiso");
    put(s, "}");
    put(s, "");
    put(s, "Solve {");
    put(s, "   Poisson");
    put(s, "   Coupled { Poisson Electron" + qword + " }");
    switch (sweep.kind) {
    case SweepKind::IdVg:
        put(s, "   Quasistationary(");
        put(s, "      InitialStep=0.1 MaxStep=0.1 MinStep=1e-05");
        put(s, "      Goal { Name=\"drain\" Voltage=" + num(sweep.fixed_bias) + " }");
        put(s, "   ){ Coupled { Poisson Electron" + qword + " } }");
        put(s, "   Quasistationary(");
        put(s, "      InitialStep=" + ramp_step + " MaxStep=" + ramp_step + " MinStep=1e-06");
        put(s, "      Goal { Name=\"gate\" Voltage=" + num(sweep.stop) + " }");
        put(s, "   ){ Coupled { Poisson Electron" + qword + " }");
        put(s, "      CurrentPlot( Time=(Range=(0 1) Intervals=" + std::to_string(intervals) + ") )");
        put(s, "   }");
        break;
    case SweepKind::IdVd:
        put(s, "   Quasistationary(");
        put(s, "      InitialStep=0.1 MaxStep=0.1 MinStep=1e-05");
        put(s, "      Goal { Name=\"gate\" Voltage=" + num(sweep.fixed_bias) + " }");
        put(s, "   ){ Coupled { Poisson Electron" + qword + " } }");
        put(s, "   Quasistationary(");
        put(s, "      InitialStep=" + ramp_step + " MaxStep=" + ramp_step + " MinStep=1e-06");
        put(s, "      Goal { Name=\"drain\" Voltage=" + num(sweep.stop) + " }");
        put(s, "   ){ Coupled { Poisson Electron" + qword + " }");
        put(s, "      CurrentPlot( Time=(Range=(0 1) Intervals=" + std::to_string(intervals) + ") )");
        put(s, "   }");
        break;
    case SweepKind::CV:
        put(s, "   Quasistationary(");
        put(s, "      InitialStep=" + ramp_step + " MaxStep=" + ramp_step + " MinStep=1e-06");
        put(s, "      Goal { Name=\"gate\" Voltage=" + num(sweep.stop) + " }");
        put(s, "   ){ ACCoupled(");
        put(s, "         StartFrequency=1e+06 EndFrequency=1e+06 NumberOfPoints=1 Decade");
        put(s, "         Node(\"gate\" \"drain\" \"source\") Exclude()");
        put(s, "      ){ Poisson Electron" + qword + " }");
        put(s, "      CurrentPlot( Time=(Range=(0 1) Intervals=" + std::to_string(intervals) + ") )");
        put(s, "   }");
        break;
    }
    put(s, "}");
    return s;
}

DeckPair make_deck_pair(const DesignParams& p, const SweepConfig& sweep, MeshTag mesh, ModelsTag models,
                        const std::string& name) {
    DeckPair d;
    d.name = name;
    d.sde = generate_sde(p, mesh);
    d.sdevice = generate_sdevice(p, sweep, models);
    return d;
}

// ----------------------------------------------------------------------------
// Deck parsing
// ----------------------------------------------------------------------------

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Parses a double at s[pos...]; advances pos past it on success.
bool parse_number_at(const std::string& s, std::size_t& pos, double& out) {
    const char* begin = s.data() + pos;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr == begin) return false;
    pos += static_cast<std::size_t>(ptr - begin);
    return true;
}

void parse_scheme(const std::string& text, DeckInfo& info) {
    std::vector<std::size_t> open_lines;
    std::size_t line = 1;
    bool in_string = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            continue;
        }
        if (in_string) {
            if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            continue;
        }
        if (c == ';') { // comment to end of line
            while (i + 1 < text.size() && text[i + 1] != '\n') ++i;
            continue;
        }
        if (c == '(') {
            open_lines.push_back(line);
            // Numeric define? (define name value)
            std::size_t j = i + 1;
            while (j < text.size() && text[j] == ' ') ++j;
            if (text.compare(j, 6, "define") == 0 && j + 6 < text.size() &&
                !is_ident_char(text[j + 6])) {
                j += 6;
                while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                std::size_t name_begin = j;
                while (j < text.size() && is_ident_char(text[j])) ++j;
                std::string name = text.substr(name_begin, j - name_begin);
                while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                double value = 0;
                if (!name.empty() && parse_number_at(text, j, value)) {
                    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                    if (j < text.size() && text[j] == ')') info.params[name] = value;
                }
            }
            continue;
        }
        if (c == ')') {
            if (open_lines.empty())
                info.diagnostics.push_back("unbalanced ')' at line " + std::to_string(line));
            else
                open_lines.pop_back();
        }
    }
    if (in_string) info.diagnostics.push_back("unterminated string literal");
    for (std::size_t ln : open_lines)
        info.diagnostics.push_back("unclosed '(' opened at line " + std::to_string(ln));
}

const char* const kKnownSections[] = {"File", "Electrode", "Physics", "Plot",
                                      "Math", "Solve",     "Device",  "System"};
const char* const kMandatorySections[] = {"Electrode", "Physics", "Plot", "Math", "Solve"};

void parse_sdevice(const std::string& text, DeckInfo& info) {
    std::vector<std::string> lines = split_lines(text);
    int depth = 0;
    std::vector<std::pair<std::size_t, int>> open_stack; // line, depth before open
    std::vector<std::string> seen_sections;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& ln = lines[li];
        std::size_t first = ln.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (ln[first] == '*') {
            // Comment line; a "* param name = value" comment carries a binding.
            std::size_t j = first + 1;
            while (j < ln.size() && ln[j] == ' ') ++j;
            if (ln.compare(j, 5, "param") == 0 && j + 5 < ln.size() && ln[j + 5] == ' ') {
                j += 6;
                while (j < ln.size() && ln[j] == ' ') ++j;
                std::size_t nb = j;
                while (j < ln.size() && is_ident_char(ln[j])) ++j;
                std::string name = ln.substr(nb, j - nb);
                while (j < ln.size() && ln[j] == ' ') ++j;
                if (!name.empty() && j < ln.size() && ln[j] == '=') {
                    ++j;
                    while (j < ln.size() && ln[j] == ' ') ++j;
                    double value = 0;
                    if (parse_number_at(ln, j, value)) info.params[name] = value;
                }
            }
            continue;
        }
        bool in_string = false;
        for (std::size_t i = 0; i < ln.size(); ++i) {
            char c = ln[i];
            if (in_string) {
                if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
                continue;
            }
            if (c == '{') {
                if (depth == 0) {
                    // Identifier before this brace names a top-level section.
                    std::size_t e = i;
                    while (e > 0 && (ln[e - 1] == ' ' || ln[e - 1] == '\t')) --e;
                    std::size_t b = e;
                    while (b > 0 && is_ident_char(ln[b - 1])) --b;
                    std::string name = ln.substr(b, e - b);
                    if (name.empty()) {
                        info.diagnostics.push_back("section without a name at line " +
                                                   std::to_string(li + 1));
                    } else {
                        seen_sections.push_back(name);
                        bool known = false;
                        for (const char* k : kKnownSections)
                            if (name == k) known = true;
                        if (!known)
                            info.diagnostics.push_back("unknown section '" + name + "' at line " +
                                                       std::to_string(li + 1));
                    }
                }
                open_stack.push_back({li + 1, depth});
                ++depth;
            } else if (c == '}') {
                if (depth == 0)
                    info.diagnostics.push_back("unbalanced '}' at line " + std::to_string(li + 1));
                else {
                    --depth;
                    open_stack.pop_back();
                }
            }
        }
    }
    for (auto& [ln, d] : open_stack)
        info.diagnostics.push_back("unclosed '{' opened at line " + std::to_string(ln));
    for (const char* m : kMandatorySections) {
        bool found = std::find(seen_sections.begin(), seen_sections.end(), m) != seen_sections.end();
        if (!found) info.diagnostics.push_back(std::string("missing mandatory section '") + m + "'");
    }
}

} // namespace

DeckInfo parse_deck(const std::string& text, DeckKind kind) {
    DeckInfo info;
    if (kind == DeckKind::Sde)
        parse_scheme(text, info);
    else
        parse_sdevice(text, info);
    return info;
}

// ----------------------------------------------------------------------------
// Variant expansion
// ----------------------------------------------------------------------------

namespace {

double level_value(const FieldBounds& b, double t) { // t in [0,1]
    double v;
    if (b.scale == Scale::Log10)
        v = std::pow(10.0, std::log10(b.lower) + t * (std::log10(b.upper) - std::log10(b.lower)));
    else
        v = b.lower + t * (b.upper - b.lower);
    if (b.integer) v = std::llround(v);
    return std::clamp(v, b.lower, b.upper);
}

std::vector<DesignParams> expand_grid(const DesignParams& base, const ParamSpace& space,
                                      const GridStrategy& grid) {
    if (grid.axes.empty()) fail(Errc::config_error, "grid strategy needs at least one axis");
    std::vector<std::size_t> field_idx;
    std::size_t total = 1;
    for (const GridAxis& ax : grid.axes) {
        if (ax.levels < 2)
            fail(Errc::config_error, "grid axis '" + ax.field + "' needs at least two levels");
        int fi = param_field_index(ax.field);
        if (fi < 0) fail(Errc::config_error, "unknown grid field '" + ax.field + "'");
        field_idx.push_back(static_cast<std::size_t>(fi));
        total *= static_cast<std::size_t>(ax.levels);
        if (total > kMaxVariants) fail(Errc::config_error, "grid expands to too many variants");
    }
    std::vector<DesignParams> out;
    out.reserve(total);
    std::vector<int> counter(grid.axes.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        DesignParams p = base;
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            const FieldBounds& b = space.fields[field_idx[a]];
            double t = static_cast<double>(counter[a]) / (grid.axes[a].levels - 1);
            p.*(kParamFields[field_idx[a]].member) = level_value(b, t);
        }
        out.push_back(clamp(p, space)); // repairs structural pairs; throws if unrepairable
        // odometer, last axis fastest
        for (std::size_t a = grid.axes.size(); a-- > 0;) {
            if (++counter[a] < grid.axes[a].levels) break;
            counter[a] = 0;
        }
    }
    return out;
}

std::vector<DesignParams> expand_lhs(const DesignParams& base, const ParamSpace& space,
                                     const LhsStrategy& lhs) {
    if (lhs.samples < 1) fail(Errc::config_error, "latin hypercube needs at least one sample");
    if (static_cast<std::size_t>(lhs.samples) > kMaxVariants)
        fail(Errc::config_error, "latin hypercube expands to too many variants");
    const std::size_t n = static_cast<std::size_t>(lhs.samples);
    Rng rng(lhs.seed);
    // One stratified, shuffled column of unit-interval values per field.
    std::vector<std::vector<double>> columns(kParamFields.size());
    for (std::size_t f = 0; f < kParamFields.size(); ++f) {
        std::vector<double>& col = columns[f];
        col.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            col[k] = (static_cast<double>(k) + rng.uniform01()) / static_cast<double>(n);
        for (std::size_t k = n; k-- > 1;) {
            std::size_t j = rng.below(k + 1);
            std::swap(col[k], col[j]);
        }
    }
    std::vector<DesignParams> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        DesignParams p = base;
        for (std::size_t f = 0; f < kParamFields.size(); ++f)
            p.*(kParamFields[f].member) = level_value(space.fields[f], columns[f][k]);
        out.push_back(clamp(p, space));
    }
    return out;
}

} // namespace

std::vector<DesignParams> expand_variants(const DesignParams& base, const ParamSpace& space,
                                          const VariantStrategy& strategy) {
    if (const auto* g = std::get_if<GridStrategy>(&strategy)) return expand_grid(base, space, *g);
    return expand_lhs(base, space, std::get<LhsStrategy>(strategy));
}

// ----------------------------------------------------------------------------
// Corpus assembly
// ----------------------------------------------------------------------------

const std::vector<std::string>& default_query_templates() {
    static const std::vector<std::string> t = {
        "Generate structure and device command files for a stacked nanosheet transistor with gate "
        "length {gate_length} nm, sheet width {sheet_width} nm, sheet thickness {sheet_thickness} nm, "
        "{num_sheets} stacked sheets, and a gate oxide EOT of {eot} nm; then run a {sweep_kind} sweep "
        "at a drain bias of {fixed_bias} V.",
        "Write simulation decks for a nanosheet device with gate workfunction {gate_workfunction} eV, "
        "channel doping {channel_doping} per cubic centimeter, source and drain doping {sd_doping} per "
        "cubic centimeter, and spacer length {spacer_length} nm. Sweep the {sweep_kind} characteristic "
        "from {start} V to {stop} V in steps of {step} V.",
        "Prepare a {sweep_kind} simulation for a gate-all-around nanosheet FET with vertical pitch "
        "{vertical_pitch} nm, supply voltage {vdd} V, and {num_sheets} sheets of width {sheet_width} "
        "nm; report the terminal currents.",
        "Create input decks for a nanosheet transistor whose gate measures {gate_length} nm over "
        "sheets of thickness {sheet_thickness} nm, hold the drain at {fixed_bias} V, and sweep the "
        "{sweep_kind} curve between {start} V and {stop} V.",
    };
    return t;
}

namespace {

const char* sweep_kind_phrase(SweepKind k) {
    switch (k) {
    case SweepKind::IdVg: return "transfer";
    case SweepKind::IdVd: return "output";
    case SweepKind::CV: return "capacitance-voltage";
    }
    fail(Errc::internal_error, "bad sweep kind");
}

// Queries read like prose, so values are rounded; the deck and the metadata
// carry the exact numbers.
std::string prose_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string placeholder_value(const std::string& key, const DesignParams& p, const SweepConfig& sw) {
    for (const FieldDef& f : kParamFields)
        if (key == f.name) return prose_double(p.*(f.member));
    if (key == "sweep_kind") return sweep_kind_phrase(sw.kind);
    if (key == "start") return prose_double(sw.start);
    if (key == "stop") return prose_double(sw.stop);
    if (key == "step") return prose_double(sw.step);
    if (key == "fixed_bias") return prose_double(sw.fixed_bias);
    fail(Errc::config_error, "unknown placeholder '{" + key + "}' in query template");
}

void check_template(const std::string& tpl) {
    static const DesignParams probe{};
    static const SweepConfig probe_sweep{};
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] != '{') continue;
        std::size_t close = tpl.find('}', i);
        if (close == std::string::npos)
            fail(Errc::config_error, "unterminated placeholder in query template");
        placeholder_value(tpl.substr(i + 1, close - i - 1), probe, probe_sweep);
        i = close;
    }
}

std::string render_template(const std::string& tpl, const DesignParams& p, const SweepConfig& sw) {
    std::string out;
    out.reserve(tpl.size() + 32);
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] != '{') {
            out += tpl[i];
            continue;
        }
        std::size_t close = tpl.find('}', i);
        if (close == std::string::npos)
            fail(Errc::config_error, "unterminated placeholder in query template");
        out += placeholder_value(tpl.substr(i + 1, close - i - 1), p, sw);
        i = close;
    }
    return out;
}

} // namespace

CorpusResult build_corpus(const std::vector<DesignParams>& variants, const std::vector<SweepConfig>& sweeps,
                          const std::vector<std::string>& templates, std::uint64_t seed, MeshTag mesh,
                          ModelsTag models) {
    if (templates.empty()) fail(Errc::empty_selection, "no query templates given");
    for (const std::string& t : templates) check_template(t);
    CorpusResult result;
    std::size_t record_index = 0;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        for (std::size_t si = 0; si < sweeps.size(); ++si, ++record_index) {
            try {
                Rng rng(seed + record_index); // seed mixing happens in the constructor
                std::size_t ti = rng.below(templates.size());
                CorpusRecord rec;
                rec.query = render_template(templates[ti], variants[vi], sweeps[si]);
                rec.sde = generate_sde(variants[vi], mesh);
                rec.sdevice = generate_sdevice(variants[vi], sweeps[si], models);
                rec.metadata = json{{"params", params_to_json(variants[vi])},
                                    {"sweep", sweep_to_json(sweeps[si])},
                                    {"mesh", mesh_tag_name(mesh)},
                                    {"models", models_tag_name(models)},
                                    {"template_index", ti}};
                result.records.push_back(std::move(rec));
            } catch (const std::exception& e) {
                result.skipped.push_back({vi, si, e.what()});
            }
        }
    }
    return result;
}

CorpusConfig corpus_config_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::schema_error, "corpus config must be an object");
    if (!j.contains("base")) fail(Errc::schema_error, "corpus config lacks 'base'");
    CorpusConfig c;
    for (auto& [key, value] : j.items()) {
        if (key == "base")
            c.base = params_from_json(value);
        else if (key == "space")
            c.space = space_from_json(value);
        else if (key == "strategy") {
            if (!value.is_object() || !value.contains("kind"))
                fail(Errc::schema_error, "strategy needs a 'kind'");
            std::string kind = value["kind"].get<std::string>();
            if (kind == "grid") {
                GridStrategy g;
                if (!value.contains("axes") || !value["axes"].is_array())
                    fail(Errc::schema_error, "grid strategy needs an 'axes' array");
                for (const json& ax : value["axes"]) {
                    if (!ax.is_object() || !ax.contains("field") || !ax.contains("levels"))
                        fail(Errc::schema_error, "grid axis needs 'field' and 'levels'");
                    g.axes.push_back({ax["field"].get<std::string>(), ax["levels"].get<int>()});
                }
                c.strategy = g;
            } else if (kind == "lhs") {
                LhsStrategy l;
                if (!value.contains("samples"))
                    fail(Errc::schema_error, "lhs strategy needs 'samples'");
                l.samples = value["samples"].get<int>();
                l.seed = value.value("seed", 0);
                c.strategy = l;
            } else {
                fail(Errc::config_error, "unknown strategy kind '" + kind + "'");
            }
        } else if (key == "sweeps") {
            if (!value.is_array() || value.empty())
                fail(Errc::schema_error, "sweeps must be a non-empty array");
            c.sweeps.clear();
            for (const json& s : value) c.sweeps.push_back(sweep_from_json(s));
        } else if (key == "templates") {
            if (!value.is_array() || value.empty())
                fail(Errc::schema_error, "templates must be a non-empty array of strings");
            c.templates.clear();
            for (const json& t : value) {
                if (!t.is_string()) fail(Errc::schema_error, "templates must be strings");
                c.templates.push_back(t.get<std::string>());
            }
        } else if (key == "seed") {
            if (!value.is_number_integer() || value.get<long long>() < 0)
                fail(Errc::schema_error, "seed must be a non-negative integer");
            c.seed = value.get<std::uint64_t>();
        } else if (key == "mesh" && value.is_string())
            c.mesh = mesh_tag_from_string(value.get<std::string>());
        else if (key == "models" && value.is_string())
            c.models = models_tag_from_string(value.get<std::string>());
        else
            fail(Errc::schema_error, "unknown corpus config key '" + key + "'");
    }
    return c;
}

CorpusResult run_corpus(const CorpusConfig& c) {
    std::vector<DesignParams> variants = expand_variants(c.base, c.space, c.strategy);
    return build_corpus(variants, c.sweeps, c.templates, c.seed, c.mesh, c.models);
}

std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records) {
    std::string out;
    for (const CorpusRecord& r : records) {
        json doc{{"query", r.query}, {"sde", r.sde}, {"sdevice", r.sdevice}, {"metadata", r.metadata}};
        out += doc.dump();
        out += '\n';
    }
    return out;
}

} // namespace nsopt
