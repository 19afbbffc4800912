#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nsopt/params.hpp"
#include "support/testutil.hpp"

using namespace nsopt;

TEST_CASE("defaults are the shipped reference design and lie in the shipped space") {
    DesignParams p;
    CHECK(p.gate_length == 14.0);
    CHECK(p.num_sheets == 3.0);
    CHECK(p.vdd == 0.65);
    ValidationResult r = validate(p, default_param_space());
    CHECK(r.in_bounds);
    CHECK(r.violations.empty());
}

TEST_CASE("effective width counts every sheet's full perimeter") {
    DesignParams p; // 3 sheets, 25 wide, 5 thick
    CHECK(effective_width_um(p) == doctest::Approx(3 * 2 * (25.0 + 5.0) * 1e-3));
}

TEST_CASE("validate reports every violated bound and pair rule by field name") {
    DesignParams p;
    p.gate_length = 4.0;       // below lower bound 8
    p.channel_doping = 1e20;   // above upper bound 1e18, and ties the default sd_doping
    ValidationResult r = validate(p, default_param_space());
    CHECK_FALSE(r.in_bounds);
    REQUIRE(r.violations.size() == 3);
    CHECK(r.violations[0].field == "gate_length");
    CHECK(r.violations[0].lower == 8.0);
    CHECK(r.violations[1].field == "channel_doping");
    CHECK(r.violations[2].field == "sd_doping"); // contrast rule: source/drain must out-dope the channel
}

TEST_CASE("validate flags a fractional sheet count") {
    DesignParams p;
    p.num_sheets = 2.5;
    ValidationResult r = validate(p, default_param_space());
    CHECK_FALSE(r.in_bounds);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].field == "num_sheets");
}

TEST_CASE("clamp projects into the box and rounds integer fields") {
    DesignParams p;
    p.gate_length = 100.0;
    p.num_sheets = 3.4;
    p.channel_doping = 1e10;
    DesignParams c = clamp(p, default_param_space());
    CHECK(c.gate_length == 25.0);
    CHECK(c.num_sheets == 3.0);
    CHECK(c.channel_doping == 1e15);
    CHECK(validate(c, default_param_space()).in_bounds);
}

TEST_CASE("clamp restores the stacking and doping-contrast pair invariants") {
    ParamSpace space = default_param_space();
    DesignParams p;
    p.vertical_pitch = 9.0;
    p.sheet_thickness = 9.5; // above upper bound 8; clamps to 8, pitch 9 > 8 holds
    DesignParams c = clamp(p, space);
    CHECK(c.vertical_pitch > c.sheet_thickness);

    // Force the conflict inside the box: narrow the pitch range below the
    // thickness so clamp has to thin the sheet instead.
    space.at("vertical_pitch").lower = 4.0;
    space.at("vertical_pitch").upper = 4.5;
    p = DesignParams{};
    p.vertical_pitch = 4.0;
    p.sheet_thickness = 6.0;
    c = clamp(p, space);
    CHECK(c.vertical_pitch > c.sheet_thickness);
}

TEST_CASE("clamp refuses NaN input") {
    DesignParams p;
    p.eot = std::nan("");
    CHECK_THROWS_WITH_AS(clamp(p, default_param_space()), doctest::Contains("eot"), Error);
}

TEST_CASE("clamp is the identity on an in-bounds design") {
    DesignParams p;
    DesignParams c = clamp(p, default_param_space());
    CHECK(params_to_json(c) == params_to_json(p));
}

TEST_CASE("params JSON io is strict about field names") {
    json j = params_to_json(DesignParams{});
    CHECK(params_from_json(j).gate_length == 14.0);

    json extra = j;
    extra["fin_height"] = 1.0;
    CHECK_THROWS_WITH_AS(params_from_json(extra), doctest::Contains("fin_height"), Error);

    json missing = j;
    missing.erase("eot");
    CHECK_THROWS_WITH_AS(params_from_json(missing), doctest::Contains("eot"), Error);

    json wrong_type = j;
    wrong_type["vdd"] = "0.65";
    CHECK_THROWS_AS(params_from_json(wrong_type), Error);
}

TEST_CASE("space JSON io round-trips and rejects inverted bounds") {
    json j = space_to_json(default_param_space());
    ParamSpace s = space_from_json(j);
    CHECK(s.at("channel_doping").scale == Scale::Log10);
    CHECK(s.at("num_sheets").integer);

    j["gate_length"]["lower"] = 30.0; // above upper 25
    CHECK_THROWS_WITH_AS(space_from_json(j), doctest::Contains("gate_length"), Error);
}

TEST_CASE("shipped config files parse to the built-in defaults") {
    json space_doc = parse_json(read_text_file(testsupport::repo_path("configs/space_default.json")));
    CHECK(space_to_json(space_from_json(space_doc)) == space_to_json(default_param_space()));

    json targets_doc =
        parse_json(read_text_file(testsupport::repo_path("configs/targets_irds2024.json")));
    SpecTargets t = targets_from_json(targets_doc);
    CHECK(t.ss_max == 72.0);
    CHECK(t.ioff_max == 1e-8);
    CHECK(t.ion_min == 7.87e-4);
    CHECK(t.onoff_min == 4.90);
    CHECK(t.vdd == 0.65);
}

TEST_CASE("targets validation rejects nonsense") {
    json j = targets_to_json(SpecTargets{});
    j["ioff_max"] = -1.0;
    CHECK_THROWS_AS(targets_from_json(j), Error);
}

TEST_CASE("field lookup by name") {
    CHECK(param_field_index("gate_length") == 0);
    CHECK(param_field_index("vdd") == 10);
    CHECK(param_field_index("fin_height") == -1);
}
