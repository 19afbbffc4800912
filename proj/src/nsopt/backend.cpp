#include "nsopt/backend.hpp"

#include <charconv>
#include <cmath>

#include "nsopt/errors.hpp"
#include "nsopt/subprocess.hpp"

namespace nsopt {

const char* backend_kind_name(const BackendConfig& cfg) {
    return std::holds_alternative<SurrogateBackend>(cfg) ? "surrogate" : "external";
}

namespace {

std::string output_tail(const CommandResult& r) {
    std::string d;
    if (!r.err.empty()) d += tail_lines(r.err, 30);
    if (!r.out.empty()) {
        if (!d.empty()) d += '\n';
        d += tail_lines(r.out, 30);
    }
    return d;
}

SimulationOutcome run_external(const ExternalBackend& b, const SweepConfig& sweep,
                                      const std::string& deck_dir) {
    if (b.command.empty()) fail(Errc::config_error, "external backend has an empty command");
    CommandResult r = run_command(b.command, deck_dir, b.timeout_s);
    if (r.timed_out)
        return NonConvergent{"backend timed out after " + format_double(b.timeout_s) +
                                    " s\n" + output_tail(r)};
    if (r.exit_code == 127)
        fail(Errc::config_error,
             "backend command failed to start (exit 127): " + b.command + "\n" + output_tail(r));
    if (r.exit_code != 0)
        return NonConvergent{"backend exited with code " + std::to_string(r.exit_code) + "\n" +
                                    output_tail(r)};
    std::string table = read_text_file(deck_dir + "/" + b.iv_file);
    IVCurve iv = parse_iv_file(table, sweep.fixed_bias);
    return Converged{std::move(iv), std::nullopt, std::nullopt};
}

} // namespace

SimulationOutcome run_backend(const BackendConfig& cfg, const DesignParams& p,
                                     const SweepConfig& sweep, const std::string& deck_dir) {
    validate_sweep(sweep);
    if (const auto* s = std::get_if<SurrogateBackend>(&cfg))
        return simulate_iv_with(s->coefficients, p, sweep);
    return run_external(std::get<ExternalBackend>(cfg), sweep, deck_dir);
}

IVCurve parse_iv_file(const std::string& text, double vd, double temperature) {
    IVCurve curve;
    curve.vd = vd;
    curve.temperature = temperature;
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string ln = lines[li];
        for (char& c : ln)
            if (c == ',' || c == '\t') c = ' ';
        std::size_t first = ln.find_first_not_of(' ');
        if (first == std::string::npos) continue;
        if (ln[first] == '#' || ln[first] == '*' || ln[first] == ';') continue;
        const char* ptr = ln.data() + first;
        const char* end = ln.data() + ln.size();
        double vg = 0, id = 0;
        auto r1 = std::from_chars(ptr, end, vg);
        if (r1.ec != std::errc()) {
            // A non-numeric line before any data is a header; afterwards it is noise.
            if (curve.vg.empty()) continue;
            fail(Errc::parse_error, "cannot parse current table line " + std::to_string(li + 1));
        }
        ptr = r1.ptr;
        while (ptr < end && *ptr == ' ') ++ptr;
        auto r2 = std::from_chars(ptr, end, id);
        if (r2.ec != std::errc())
            fail(Errc::parse_error,
                 "current table line " + std::to_string(li + 1) + " has no second column");
        curve.vg.push_back(vg);
        curve.id.push_back(id);
    }
    if (curve.vg.size() < 2)
        fail(Errc::parse_error, "current table has fewer than two points");
    check_iv_invariants(curve);
    return curve;
}

BackendConfig backend_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::schema_error, "backend config must be an object");
    std::string kind = j.value("kind", std::string("surrogate"));
    if (kind == "surrogate") {
        for (auto& [key, value] : j.items())
            if (key != "kind") fail(Errc::schema_error, "unknown backend key '" + key + "'");
        return SurrogateBackend{};
    }
    if (kind == "external") {
        ExternalBackend b;
        for (auto& [key, value] : j.items()) {
            if (key == "kind") continue;
            if (key == "command" && value.is_string())
                b.command = value.get<std::string>();
            else if (key == "iv_file" && value.is_string())
                b.iv_file = value.get<std::string>();
            else if (key == "timeout_s" && value.is_number())
                b.timeout_s = value.get<double>();
            else
                fail(Errc::schema_error, "bad backend key '" + key + "'");
        }
        if (b.command.empty()) fail(Errc::config_error, "external backend needs a command");
        if (b.iv_file.empty() || b.iv_file.front() == '/')
            fail(Errc::config_error, "iv_file must be a relative path");
        if (!(b.timeout_s > 0) && b.timeout_s != 0)
            fail(Errc::config_error, "timeout_s must be positive (or zero for no deadline)");
        return b;
    }
    fail(Errc::config_error, "unknown backend kind '" + kind + "' (expected surrogate or external)");
}

json backend_to_json(const BackendConfig& cfg) {
    if (std::holds_alternative<SurrogateBackend>(cfg)) return json{{"kind", "surrogate"}};
    const auto& b = std::get<ExternalBackend>(cfg);
    return json{{"kind", "external"},
                {"command", b.command},
                {"iv_file", b.iv_file},
                {"timeout_s", b.timeout_s}};
}

} // namespace nsopt
