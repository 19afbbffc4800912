#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "nsopt/deckgen.hpp"
#include "support/testutil.hpp"

using namespace nsopt;

namespace {

std::vector<std::string> lines_of(const std::string& text) { return split_lines(text); }

// Lines present in a but not in b, order-preserving.
std::vector<std::string> line_diff(const std::string& a, const std::string& b) {
    std::vector<std::string> out;
    std::multiset<std::string> rhs;
    for (const auto& l : lines_of(b)) rhs.insert(l);
    for (const auto& l : lines_of(a)) {
        auto it = rhs.find(l);
        if (it == rhs.end()) out.push_back(l);
        else rhs.erase(it);
    }
    return out;
}

} // namespace

TEST_CASE("structure script header defines all eleven parameters, recoverable exactly") {
    DesignParams p;
    p.gate_length = 13.37;
    p.channel_doping = 2.5e16;
    std::string deck = generate_sde(p, MeshTag::Default);
    DeckInfo info = parse_deck(deck, DeckKind::Sde);
    CHECK(info.diagnostics.empty());
    REQUIRE(info.params.size() == kParamFields.size());
    for (const FieldDef& f : kParamFields)
        CHECK(info.params.at(f.name) == p.*(f.member)); // bit-exact round trip
}

TEST_CASE("structure script instantiates one body per sheet") {
    DesignParams p;
    p.num_sheets = 4;
    std::string deck = generate_sde(p, MeshTag::Default);
    for (int i = 1; i <= 4; ++i)
        CHECK(deck.find("\"channel_sheet_" + std::to_string(i) + "\"") != std::string::npos);
    CHECK(deck.find("\"channel_sheet_5\"") == std::string::npos);
    CHECK(deck.find("sde:build-mesh") != std::string::npos);
}

TEST_CASE("mesh tags change only the two refinement statements") {
    DesignParams p;
    std::string coarse = generate_sde(p, MeshTag::Coarse);
    std::string fine = generate_sde(p, MeshTag::Fine);
    std::vector<std::string> only_coarse = line_diff(coarse, fine);
    REQUIRE(only_coarse.size() == 2);
    for (const std::string& l : only_coarse)
        CHECK(l.find("define-refinement-size") != std::string::npos);
}

TEST_CASE("structure generation rejects params it cannot lay out") {
    DesignParams p;
    p.vertical_pitch = 5.0;
    p.sheet_thickness = 5.0; // sheets would overlap
    CHECK_THROWS_WITH_AS(generate_sde(p, MeshTag::Default),
                         doctest::Contains("vertical_pitch"), Error);

    p = DesignParams{};
    p.num_sheets = 2.5;
    CHECK_THROWS_AS(generate_sde(p, MeshTag::Default), Error);

    p = DesignParams{};
    p.eot = 0.0;
    CHECK_THROWS_AS(generate_sde(p, MeshTag::Default), Error);
}

TEST_CASE("solver deck carries the five mandatory sections and the sweep point count") {
    DesignParams p;
    SweepConfig sweep;
    std::string deck = generate_sdevice(p, sweep, ModelsTag::DriftDiffusion);
    for (const char* section : {"Electrode", "Physics", "Plot", "Math", "Solve"})
        CHECK(deck.find(std::string(section) + " {") != std::string::npos);
    CHECK(deck.find("66 points") != std::string::npos);
    CHECK(deck.find("Intervals=65") != std::string::npos);
    CHECK(deck.find("Workfunction=4.6") != std::string::npos);

    DeckInfo info = parse_deck(deck, DeckKind::Sdevice);
    CHECK(info.diagnostics.empty());
    CHECK(info.params.at("gate_length") == p.gate_length);
}

TEST_CASE("quantum model differs from drift-diffusion only by the quantum-potential keyword") {
    DesignParams p;
    SweepConfig sweep;
    std::string dd = generate_sdevice(p, sweep, ModelsTag::DriftDiffusion);
    std::string qm = generate_sdevice(p, sweep, ModelsTag::DriftDiffusionQuantum);
    CHECK(line_diff(dd, qm).size() == 3);       // three Coupled statements lose the token
    std::vector<std::string> added = line_diff(qm, dd);
    REQUIRE(added.size() == 4);                 // those three plus the Physics entry
    for (const std::string& l : added)
        CHECK(l.find("eQuantumPotential") != std::string::npos);
}

TEST_CASE("sweep kinds ramp different terminals") {
    DesignParams p;
    SweepConfig sweep;
    std::string idvg = generate_sdevice(p, sweep, ModelsTag::DriftDiffusion);
    sweep.kind = SweepKind::IdVd;
    std::string idvd = generate_sdevice(p, sweep, ModelsTag::DriftDiffusion);
    sweep.kind = SweepKind::CV;
    std::string cv = generate_sdevice(p, sweep, ModelsTag::DriftDiffusion);

    CHECK(idvg.find("\"gate\"") != std::string::npos);
    CHECK(idvg != idvd);
    CHECK(cv.find("ACCoupled") != std::string::npos);
    CHECK(cv.find("StartFrequency=1e+06") != std::string::npos);
    CHECK(idvg.find("ACCoupled") == std::string::npos);
}

TEST_CASE("scheme parser pinpoints malformed input instead of throwing") {
    DeckInfo info = parse_deck("(define a 1\n(define b 2)", DeckKind::Sde);
    REQUIRE_FALSE(info.diagnostics.empty());
    CHECK(info.diagnostics[0].find("line 1") != std::string::npos);
    CHECK(info.params.count("b") == 1); // parsing continues past the problem

    info = parse_deck("(define s \"unterminated)", DeckKind::Sde);
    REQUIRE_FALSE(info.diagnostics.empty());
    CHECK(info.diagnostics[0].find("string") != std::string::npos);
}

TEST_CASE("solver-deck parser reports missing mandatory sections") {
    DeckInfo info = parse_deck("Electrode {\n}\nPhysics {\n}\n", DeckKind::Sdevice);
    bool found = false;
    for (const std::string& d : info.diagnostics)
        if (d.find("missing mandatory section 'Plot'") != std::string::npos) found = true;
    CHECK(found);

    info = parse_deck("Banana {\n}\n", DeckKind::Sdevice);
    REQUIRE_FALSE(info.diagnostics.empty());
    CHECK(info.diagnostics[0].find("Banana") != std::string::npos);
}

TEST_CASE("grid expansion is an odometer over the requested axes") {
    GridStrategy g;
    g.axes.push_back({"gate_length", 3});
    g.axes.push_back({"eot", 2});
    std::vector<DesignParams> v = expand_variants(DesignParams{}, default_param_space(), VariantStrategy{g});
    REQUIRE(v.size() == 6);
    CHECK(v[0].gate_length == 8.0);
    CHECK(v[0].eot == 0.5);
    CHECK(v[1].eot == 1.5);   // last axis fastest
    CHECK(v[2].gate_length == 16.5);
    CHECK(v[5].gate_length == 25.0);
    for (const DesignParams& p : v) CHECK(validate(p, default_param_space()).in_bounds);

    GridStrategy bad;
    bad.axes.push_back({"fin_height", 3});
    CHECK_THROWS_WITH_AS(expand_variants(DesignParams{}, default_param_space(), VariantStrategy{bad}),
                         doctest::Contains("fin_height"), Error);
}

TEST_CASE("log-scaled grid axes are spaced in decades") {
    GridStrategy g;
    g.axes.push_back({"channel_doping", 4}); // 1e15..1e18 in 4 levels
    std::vector<DesignParams> v =
        expand_variants(DesignParams{}, default_param_space(), VariantStrategy{g});
    REQUIRE(v.size() == 4);
    CHECK(v[0].channel_doping == doctest::Approx(1e15));
    CHECK(v[1].channel_doping == doctest::Approx(1e16));
    CHECK(v[2].channel_doping == doctest::Approx(1e17));
    CHECK(v[3].channel_doping == doctest::Approx(1e18));
}

TEST_CASE("latin hypercube sampling is deterministic, in-bounds and integral where needed") {
    LhsStrategy lhs;
    lhs.samples = 16;
    lhs.seed = 42;
    std::vector<DesignParams> a = expand_variants(DesignParams{}, default_param_space(), VariantStrategy{lhs});
    std::vector<DesignParams> b = expand_variants(DesignParams{}, default_param_space(), VariantStrategy{lhs});
    REQUIRE(a.size() == 16);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(params_to_json(a[i]) == params_to_json(b[i]));
    for (const DesignParams& p : a) {
        CHECK(validate(p, default_param_space()).in_bounds);
        CHECK(p.num_sheets == std::round(p.num_sheets));
    }

    lhs.seed = 43; // a different seed moves the points
    std::vector<DesignParams> c = expand_variants(DesignParams{}, default_param_space(), VariantStrategy{lhs});
    CHECK(params_to_json(a[0]) != params_to_json(c[0]));
}

TEST_CASE("corpus pairs every variant with every sweep and renders prose queries") {
    GridStrategy g;
    g.axes.push_back({"gate_length", 2});
    std::vector<DesignParams> variants =
        expand_variants(DesignParams{}, default_param_space(), VariantStrategy{g});
    SweepConfig idvg;
    SweepConfig idvd;
    idvd.kind = SweepKind::IdVd;
    CorpusResult r = build_corpus(variants, {idvg, idvd}, default_query_templates(), 1,
                                  MeshTag::Default, ModelsTag::DriftDiffusion);
    CHECK(r.skipped.empty());
    REQUIRE(r.records.size() == 4);
    for (const CorpusRecord& rec : r.records) {
        CHECK(rec.query.find('{') == std::string::npos); // placeholders all resolved
        CHECK_FALSE(rec.sde.empty());
        CHECK(rec.sdevice.find("Solve {") != std::string::npos);
        CHECK(rec.metadata.contains("params"));
        CHECK(rec.metadata.contains("sweep"));
    }

    std::string jsonl = corpus_to_jsonl(r.records);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 4);
}

TEST_CASE("corpus template checks happen before any work") {
    CHECK_THROWS_WITH_AS(build_corpus({DesignParams{}}, {SweepConfig{}}, {"bad {placeholder}"}, 1,
                                      MeshTag::Default, ModelsTag::DriftDiffusion),
                         doctest::Contains("placeholder"), Error);
    CHECK_THROWS_AS(build_corpus({DesignParams{}}, {SweepConfig{}}, {}, 1, MeshTag::Default,
                                 ModelsTag::DriftDiffusion),
                    Error);
}

TEST_CASE("corpus config file drives the whole pipeline") {
    json cfg = parse_json(read_text_file(testsupport::repo_path("configs/corpus_small.json")));
    CorpusResult r = run_corpus(corpus_config_from_json(cfg));
    CHECK(r.records.size() == 16); // 8 samples x 2 sweeps
}
