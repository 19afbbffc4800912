#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "nsopt/params.hpp"
#include "nsopt/sweep.hpp"

namespace nsopt {

// ============================================================================
// Command-file emission. Scripts are deterministic down to the byte for a
// given input: numbers render in shortest round-trip form, order is fixed.
// ============================================================================

enum class MeshTag { Coarse, Default, Fine };
enum class ModelsTag { DriftDiffusion, DriftDiffusionQuantum };

const char* mesh_tag_name(MeshTag m);
MeshTag mesh_tag_from_string(const std::string& s);
const char* models_tag_name(ModelsTag m);
ModelsTag models_tag_from_string(const std::string& s);

struct DeckPair {
    std::string name;    // basename; files are <name>_dvs.cmd / <name>_des.cmd
    std::string sde;     // structure script
    std::string sdevice; // device command file
};

// Scheme-style structure script: numeric header (one define per parameter),
// stacked channel/oxide regions (one construction statement per sheet),
// doping placements, contact sets, mesh refinement. Mesh tags change only
// the refinement-spacing constants (channel spacing thickness/4, /6, /8).
std::string generate_sde(const DesignParams& p, MeshTag mesh);

// Sectioned device command file: File, Electrode, Physics, Plot, Math, Solve.
// The quantum models tag differs from drift-diffusion only by the
// quantum-correction keyword. Throws UnsupportedSweep for kinds without a
// template (all three shipped kinds have one).
std::string generate_sdevice(const DesignParams& p, const SweepConfig& sweep, ModelsTag models);

DeckPair make_deck_pair(const DesignParams& p, const SweepConfig& sweep, MeshTag mesh, ModelsTag models,
                        const std::string& name = "nsfet");

enum class DeckKind { Sde, Sdevice };

struct DeckInfo {
    std::map<std::string, double> params; // numeric header bindings
    std::vector<std::string> diagnostics; // empty means clean
};

// Recovers the header map and reports unbalanced delimiters, unknown section
// names and missing mandatory sections. Never throws on malformed text; the
// problems land in diagnostics.
DeckInfo parse_deck(const std::string& text, DeckKind kind);

// ============================================================================
// Variant expansion and corpus assembly
// ============================================================================

struct GridAxis {
    std::string field;
    int levels = 0; // >= 2 so both bounds appear
};

struct GridStrategy {
    std::vector<GridAxis> axes;
};

struct LhsStrategy {
    int samples = 0;
    std::uint64_t seed = 0;
};

using VariantStrategy = std::variant<GridStrategy, LhsStrategy>;

// Grid: Cartesian product over the named axes, levels evenly spaced across
// the bounds (log-space for log-scaled fields), other fields held at base.
// Latin hypercube: `samples` points stratified per field, deterministic
// under seed. Every output validates in-bounds.
std::vector<DesignParams> expand_variants(const DesignParams& base, const ParamSpace& space,
                                          const VariantStrategy& strategy);

struct CorpusRecord {
    std::string query;
    std::string sde;
    std::string sdevice;
    json metadata;
};

struct CorpusSkip {
    std::size_t variant_index = 0;
    std::size_t sweep_index = 0;
    std::string message;
};

struct CorpusResult {
    std::vector<CorpusRecord> records;
    std::vector<CorpusSkip> skipped;
};

// Natural-language phrasing templates; placeholders in {braces} draw from
// the parameter and sweep values, so every number a query mentions also
// appears in the record metadata. Templates contain no literal digits.
const std::vector<std::string>& default_query_templates();

// One record per (variant, sweep). Template choice is seeded per record
// (seed mixed with the record index). Per-record failures are skipped and
// reported, not fatal.
CorpusResult build_corpus(const std::vector<DesignParams>& variants, const std::vector<SweepConfig>& sweeps,
                          const std::vector<std::string>& templates, std::uint64_t seed,
                          MeshTag mesh = MeshTag::Default, ModelsTag models = ModelsTag::DriftDiffusion);

// JSONL, keys query/sde/sdevice/metadata, one record per line.
std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records);

// Declarative corpus build, as consumed by the CLI and the C interface.
struct CorpusConfig {
    DesignParams base;
    ParamSpace space = default_param_space();
    VariantStrategy strategy = LhsStrategy{8, 1};
    std::vector<SweepConfig> sweeps = {SweepConfig{}};
    std::vector<std::string> templates = default_query_templates();
    std::uint64_t seed = 1;
    MeshTag mesh = MeshTag::Default;
    ModelsTag models = ModelsTag::DriftDiffusion;
};

CorpusConfig corpus_config_from_json(const json& j);
CorpusResult run_corpus(const CorpusConfig& c);

} // namespace nsopt
