#include "nsopt/record.hpp"

#include "nsopt/errors.hpp"

namespace nsopt {

json record_to_json(const IterationRecord& r) {
    json j;
    j["iteration"] = r.iteration;
    j["params"] = params_to_json(r.params);
    j["rationale"] = r.rationale;
    j["from_recovery"] = r.from_recovery;
    j["converged"] = r.converged;
    j["diagnostic"] = r.diagnostic;
    j["metrics"] = r.metrics ? metrics_to_json(*r.metrics) : json(nullptr);
    j["score"] = r.score ? json(*r.score) : json(nullptr);
    j["wall_time_s"] = r.wall_time_s;
    return j;
}

IterationRecord record_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::schema_error, "iteration record must be an object");
    for (const char* key : {"iteration", "params", "rationale", "converged"})
        if (!j.contains(key))
            fail(Errc::schema_error, std::string("iteration record lacks '") + key + "'");
    IterationRecord r;
    if (!j["iteration"].is_number_integer())
        fail(Errc::schema_error, "iteration must be an integer");
    r.iteration = j["iteration"].get<int>();
    r.params = params_from_json(j["params"]);
    if (!j["rationale"].is_string()) fail(Errc::schema_error, "rationale must be a string");
    r.rationale = j["rationale"].get<std::string>();
    if (!j["converged"].is_boolean()) fail(Errc::schema_error, "converged must be a boolean");
    r.converged = j["converged"].get<bool>();
    r.from_recovery = j.value("from_recovery", false);
    r.diagnostic = j.value("diagnostic", std::string());
    if (j.contains("metrics") && !j["metrics"].is_null()) r.metrics = metrics_from_json(j["metrics"]);
    if (j.contains("score") && !j["score"].is_null()) {
        if (!j["score"].is_number()) fail(Errc::schema_error, "score must be a number");
        r.score = j["score"].get<double>();
    }
    if (j.contains("wall_time_s")) {
        if (!j["wall_time_s"].is_number()) fail(Errc::schema_error, "wall_time_s must be a number");
        r.wall_time_s = j["wall_time_s"].get<double>();
    }
    return r;
}

std::string trajectory_line(const IterationRecord& r) { return record_to_json(r).dump() + "\n"; }

std::vector<IterationRecord> load_trajectory(const std::string& text) {
    std::vector<IterationRecord> records;
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& ln = lines[i];
        if (ln.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(record_from_json(parse_json(ln)));
        } catch (const std::exception& e) {
            fail(Errc::corrupt_trajectory,
                 "trajectory line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return records;
}

} // namespace nsopt
