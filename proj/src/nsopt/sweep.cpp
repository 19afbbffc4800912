#include "nsopt/sweep.hpp"

#include <cmath>

namespace nsopt {

const char* sweep_kind_name(SweepKind k) {
    switch (k) {
        case SweepKind::IdVg: return "idvg";
        case SweepKind::IdVd: return "idvd";
        case SweepKind::CV: return "cv";
    }
    return "idvg";
}

SweepKind sweep_kind_from_string(const std::string& s) {
    if (s == "idvg") return SweepKind::IdVg;
    if (s == "idvd") return SweepKind::IdVd;
    if (s == "cv") return SweepKind::CV;
    fail(Errc::unsupported_sweep, "no deck template for sweep kind '" + s + "'");
}

void validate_sweep(const SweepConfig& s) {
    if (!(s.start < s.stop)) fail(Errc::invalid_sweep, "start must be < stop");
    if (!(s.step > 0.0)) fail(Errc::invalid_sweep, "step must be > 0");
    if (sweep_point_count(s) < 10) fail(Errc::invalid_sweep, "sweep must have at least 10 points");
}

int sweep_point_count(const SweepConfig& s) {
    double ratio = (s.stop - s.start) / s.step;
    long long n = std::llround(ratio);
    // Tolerate fp residue when the range divides evenly, truncate otherwise.
    if (std::fabs(ratio - static_cast<double>(n)) > 1e-6) n = static_cast<long long>(std::floor(ratio));
    return static_cast<int>(n) + 1;
}

std::vector<double> sweep_grid(const SweepConfig& s) {
    int n = sweep_point_count(s);
    std::vector<double> g(static_cast<std::size_t>(n));
    double span = s.stop - s.start;
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = s.start + span * static_cast<double>(i) / static_cast<double>(n - 1);
    g.front() = s.start;
    g.back() = s.stop;
    return g;
}

json sweep_to_json(const SweepConfig& s) {
    json j = json::object();
    j["kind"] = sweep_kind_name(s.kind);
    j["fixed_bias"] = s.fixed_bias;
    j["start"] = s.start;
    j["stop"] = s.stop;
    j["step"] = s.step;
    return j;
}

SweepConfig sweep_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::parse_error, "sweep must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "kind" && k != "fixed_bias" && k != "start" && k != "stop" && k != "step")
            fail(Errc::schema_error, "sweep has unknown key '" + k + "'");
    }
    SweepConfig s;
    if (j.contains("kind")) s.kind = sweep_kind_from_string(j.at("kind").get<std::string>());
    s.fixed_bias = j.value("fixed_bias", s.fixed_bias);
    s.start = j.value("start", s.start);
    s.stop = j.value("stop", s.stop);
    s.step = j.value("step", s.step);
    validate_sweep(s);
    return s;
}

} // namespace nsopt
