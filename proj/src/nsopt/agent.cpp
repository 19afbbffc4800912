#include "nsopt/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include <httplib.h>

#include "nsopt/errors.hpp"

namespace nsopt {

namespace {

// Display rounding for prompt text; never round-tripped.
std::string disp(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

double baseline_score(const PerformanceMetrics& m, const SpecTargets& t) {
    double s = 0.0;
    s += std::max(0.0, (m.ss_mv_dec - t.ss_max) / t.ss_max);
    s += std::max(0.0, std::log10(m.ioff_a_per_um / t.ioff_max));
    s += std::max(0.0, std::log10(t.ion_min / m.ion_a_per_um));
    return s;
}

const char* prompt_style_name(PromptStyle s) {
    return s == PromptStyle::Quantitative ? "quantitative" : "qualitative";
}

PromptStyle prompt_style_from_string(const std::string& s) {
    if (s == "quantitative") return PromptStyle::Quantitative;
    if (s == "qualitative") return PromptStyle::Qualitative;
    fail(Errc::config_error, "unknown prompt style '" + s + "' (expected quantitative or qualitative)");
}

// ----------------------------------------------------------------------------
// Prompts
// ----------------------------------------------------------------------------

std::string build_system_prompt() {
    return "You are a device-design assistant for stacked nanosheet transistors. Reply with exactly "
           "one JSON object holding the numeric design fields gate_length, sheet_width, "
           "sheet_thickness, num_sheets, vertical_pitch, eot, gate_workfunction, channel_doping, "
           "sd_doping, spacer_length and vdd, plus an optional string field \"rationale\". "
           "No text outside the JSON object.";
}

namespace {

std::string format_ranges(const ParamSpace& space) {
    std::string s = "Allowed parameter ranges:\n";
    for (std::size_t i = 0; i < kParamFields.size(); ++i) {
        const FieldBounds& b = space.fields[i];
        s += "- ";
        s += kParamFields[i].name;
        s += ": " + disp(b.lower) + " to " + disp(b.upper);
        if (std::string_view(kParamFields[i].unit) != "count") {
            s += ' ';
            s += kParamFields[i].unit;
        }
        if (b.scale == Scale::Log10) s += ", log scale";
        if (b.integer) s += ", integer";
        s += '\n';
    }
    return s;
}

std::string quantitative_outcome(const IterationRecord& r, const SpecTargets& t) {
    const PerformanceMetrics& m = *r.metrics;
    SpecVerdicts v = m.verdicts ? *m.verdicts : check_spec(m, t);
    auto pf = [](bool ok) { return ok ? "pass" : "fail"; };
    std::string s = "converged: ss " + disp(m.ss_mv_dec) + " mV/dec (" + pf(v.ss_ok) + "), ioff " +
                    disp(m.ioff_a_per_um) + " A/um (" + pf(v.ioff_ok) + "), ion " +
                    disp(m.ion_a_per_um) + " A/um (" + pf(v.ion_ok) + "), onoff " +
                    disp(m.onoff_log10) + " decades (" + pf(v.onoff_ok) + ")";
    if (r.score) s += "; score " + disp(*r.score);
    return s;
}

std::string qualitative_outcome(const IterationRecord& r, const SpecTargets& t) {
    const PerformanceMetrics& m = *r.metrics;
    auto grade = [](double severity) { // <= 0 pass, otherwise graded miss
        if (severity <= 0) return "meets the target";
        if (severity <= 1.0) return "misses the target slightly";
        return "misses the target badly";
    };
    // Severity 1.0 marks the slight/bad boundary: 10 mV/dec of swing, one
    // decade of current, half a decade of on/off ratio.
    std::string s = "converged: subthreshold swing ";
    s += grade((m.ss_mv_dec - t.ss_max) / 10.0);
    s += "; off-current ";
    s += grade(std::log10(m.ioff_a_per_um / t.ioff_max));
    s += "; on-current ";
    s += grade(std::log10(t.ion_min / m.ion_a_per_um));
    s += "; on/off ratio ";
    s += grade((t.onoff_min - m.onoff_log10) / 0.5);
    return s;
}

std::string first_line(const std::string& s) {
    std::size_t nl = s.find('\n');
    return nl == std::string::npos ? s : s.substr(0, nl);
}

} // namespace

std::string build_prompt(const std::vector<IterationRecord>& history, const SpecTargets& targets,
                         const ParamSpace& space, PromptStyle style) {
    std::string s;
    if (style == PromptStyle::Quantitative) {
        s += "Design targets:\n";
        s += "- subthreshold swing at most " + disp(targets.ss_max) + " mV/dec\n";
        s += "- off-current at most " + disp(targets.ioff_max) + " A/um\n";
        s += "- on-current at least " + disp(targets.ion_min) + " A/um\n";
        s += "- on/off ratio at least " + disp(targets.onoff_min) + " decades\n";
        s += "- supply " + disp(targets.vdd) + " V at " + disp(targets.temperature) + " K\n";
    } else {
        s += "Design goals: bring the subthreshold swing under its ceiling, keep the off-current "
             "under its ceiling, keep the on-current above its floor, and keep the on/off ratio "
             "above its floor, all at the given supply.\n";
    }
    s += '\n';
    s += format_ranges(space);
    s += "\nRecent evaluations (oldest first):\n";
    if (history.empty()) s += "(none yet)\n";
    std::size_t begin = history.size() > kHistoryWindow ? history.size() - kHistoryWindow : 0;
    for (std::size_t i = begin; i < history.size(); ++i) {
        const IterationRecord& r = history[i];
        s += "[iteration " + std::to_string(r.iteration) + "] params " + params_to_json(r.params).dump() +
             "\n  ";
        if (r.converged && r.metrics)
            s += style == PromptStyle::Quantitative ? quantitative_outcome(r, targets)
                                                    : qualitative_outcome(r, targets);
        else
            s += "failed to converge: " + first_line(r.diagnostic);
        s += '\n';
    }
    s += "\nPropose the next design. Improve the failing figures of merit and keep the passing ones "
         "passing. Reply with one JSON object.\n";
    return s;
}

std::string build_recovery_prompt(const DesignParams& last_good, const DesignParams& failed,
                                  const std::string& diagnostic, const ParamSpace& space) {
    std::string s = "The most recent design failed to converge in the device simulator.\n\n";
    s += "Last successful design:\n" + params_to_json(last_good).dump() + "\n\n";
    s += "Failed design:\n" + params_to_json(failed).dump() + "\n\n";
    s += "Solver diagnostic (tail):\n";
    s += tail_lines(diagnostic, kDiagnosticTail);
    if (s.back() != '\n') s += '\n';
    s += '\n';
    s += format_ranges(space);
    s += "\nPropose a design between the failed one and the last successful one, biased toward the "
         "successful one. Reply with one JSON object.\n";
    return s;
}

// ----------------------------------------------------------------------------
// Reply parsing
// ----------------------------------------------------------------------------

Proposal parse_proposal(const std::string& text, const ParamSpace& space) {
    std::size_t pos = 0;
    for (;;) {
        std::size_t open = text.find('{', pos);
        if (open == std::string::npos)
            fail(Errc::no_json_found, "no JSON object found in the model reply");
        int depth = 0;
        bool in_string = false, escaped = false;
        std::size_t end = std::string::npos;
        for (std::size_t i = open; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"')
                in_string = true;
            else if (c == '{')
                ++depth;
            else if (c == '}' && --depth == 0) {
                end = i;
                break;
            }
        }
        if (end == std::string::npos) { // no balanced close from here; try the next opener
            pos = open + 1;
            continue;
        }
        json j = json::parse(text.substr(open, end - open + 1), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            pos = open + 1;
            continue;
        }
        // First balanced object is the proposal; from here problems are errors.
        Proposal p;
        DesignParams d{};
        std::array<bool, 11> seen{};
        for (auto& [key, value] : j.items()) {
            if (key == "rationale") {
                if (!value.is_string())
                    fail(Errc::proposal_error, "proposal rationale must be a string");
                p.rationale = value.get<std::string>();
                continue;
            }
            int fi = param_field_index(key);
            if (fi < 0) fail(Errc::proposal_error, "unexpected field '" + key + "' in proposal");
            if (!value.is_number())
                fail(Errc::proposal_error, "proposal field '" + key + "' must be a JSON number");
            d.*(kParamFields[static_cast<std::size_t>(fi)].member) = value.get<double>();
            seen[static_cast<std::size_t>(fi)] = true;
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                fail(Errc::proposal_error,
                     std::string("proposal lacks field '") + kParamFields[i].name + "'");
        p.params = clamp(d, space);
        return p;
    }
}

// ----------------------------------------------------------------------------
// Transports
// ----------------------------------------------------------------------------

json chat_request_to_json(const ChatRequest& req) {
    json messages = json::array();
    for (const ChatMessage& m : req.messages)
        messages.push_back(json{{"role", m.role}, {"content", m.content}});
    return json{{"model", req.model}, {"temperature", req.temperature}, {"messages", messages}};
}

LlmConfig llm_config_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::schema_error, "llm config must be an object");
    LlmConfig c;
    for (auto& [key, value] : j.items()) {
        if (key == "base_url" && value.is_string())
            c.base_url = value.get<std::string>();
        else if (key == "model" && value.is_string())
            c.model = value.get<std::string>();
        else if (key == "temperature" && value.is_number())
            c.temperature = value.get<double>();
        else if (key == "api_key_env" && value.is_string())
            c.api_key_env = value.get<std::string>();
        else if (key == "transport_attempts" && value.is_number_integer())
            c.transport_attempts = value.get<int>();
        else if (key == "parse_retries" && value.is_number_integer())
            c.parse_retries = value.get<int>();
        else if (key == "style" && value.is_string())
            c.style = prompt_style_from_string(value.get<std::string>());
        else
            fail(Errc::schema_error, "bad llm config key '" + key + "'");
    }
    if (c.transport_attempts < 1) fail(Errc::config_error, "transport_attempts must be at least 1");
    if (c.parse_retries < 0) fail(Errc::config_error, "parse_retries must not be negative");
    return c;
}

json llm_config_to_json(const LlmConfig& cfg) {
    return json{{"base_url", cfg.base_url},
                {"model", cfg.model},
                {"temperature", cfg.temperature},
                {"api_key_env", cfg.api_key_env},
                {"transport_attempts", cfg.transport_attempts},
                {"parse_retries", cfg.parse_retries},
                {"style", prompt_style_name(cfg.style)}};
}

HttpTransport::HttpTransport(const LlmConfig& cfg) : cfg_(cfg) {
    const std::string& url = cfg.base_url;
    if (url.rfind("https://", 0) == 0)
        fail(Errc::config_error,
             "TLS endpoints are not supported by this build; point base_url at a plain-http proxy");
    if (url.rfind("http://", 0) != 0)
        fail(Errc::config_error, "base_url must start with http://");
    std::size_t path_start = url.find('/', 7);
    if (path_start == std::string::npos) {
        host_ = url;
    } else {
        host_ = url.substr(0, path_start);
        std::string prefix = url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        path_ = prefix;
    }
    path_ += "/chat/completions";
}

std::string HttpTransport::complete(const ChatRequest& req) {
    httplib::Client client(host_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty())
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
            headers.insert({"Authorization", std::string("Bearer ") + key});
    const std::string body = chat_request_to_json(req).dump();

    std::string last_problem;
    for (int attempt = 0; attempt < cfg_.transport_attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(500 * (1 << (attempt - 1))));
        httplib::Result res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_problem = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json doc = json::parse(res->body, nullptr, false);
            if (doc.is_discarded())
                fail(Errc::transport_error, "malformed completion response body");
            if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
                !doc["choices"][0].contains("message") ||
                !doc["choices"][0]["message"].contains("content") ||
                !doc["choices"][0]["message"]["content"].is_string())
                fail(Errc::transport_error, "completion response lacks choices[0].message.content");
            return doc["choices"][0]["message"]["content"].get<std::string>();
        }
        if (res->status == 429 || res->status >= 500) { // transient
            last_problem = "HTTP " + std::to_string(res->status);
            continue;
        }
        fail(Errc::transport_error, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    fail(Errc::transport_error, "gave up after " + std::to_string(cfg_.transport_attempts) +
                                    " attempts (" + last_problem + ")");
}

RecordingTransport::RecordingTransport(Transport& inner, std::string transcript_path)
    : inner_(inner), path_(std::move(transcript_path)) {}

std::string RecordingTransport::complete(const ChatRequest& req) {
    std::string response = inner_.complete(req);
    json line{{"request", chat_request_to_json(req)}, {"response", response}};
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot open transcript for append: " + path_);
    out << line.dump() << '\n';
    out.flush();
    if (!out) fail(Errc::io_error, "cannot write transcript: " + path_);
    return response;
}

ReplayTransport::ReplayTransport(const std::string& transcript_path) {
    std::string text = read_text_file(transcript_path);
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("request") || !j.contains("response") ||
            !j["request"].contains("messages") || !j["response"].is_string())
            fail(Errc::parse_error,
                 "transcript line " + std::to_string(i + 1) + " is not a request/response pair");
        entries_.push_back({j["request"]["messages"], j["response"].get<std::string>(), false});
    }
}

std::string ReplayTransport::complete(const ChatRequest& req) {
    json want = chat_request_to_json(req)["messages"];
    for (Entry& e : entries_) {
        if (e.consumed || e.messages != want) continue;
        e.consumed = true;
        return e.response;
    }
    fail(Errc::transport_error,
         "no recorded reply matches the request (" + std::to_string(remaining()) +
             " unconsumed transcript entries)");
}

std::size_t ReplayTransport::remaining() const {
    std::size_t n = 0;
    for (const Entry& e : entries_)
        if (!e.consumed) ++n;
    return n;
}

// ----------------------------------------------------------------------------
// Proposal round-trip
// ----------------------------------------------------------------------------

namespace {

bool is_unusable_reply(Errc c) {
    return c == Errc::no_json_found || c == Errc::proposal_error || c == Errc::schema_error ||
           c == Errc::parse_error || c == Errc::unrepairable_params;
}

} // namespace

Proposal propose_llm(Transport& transport, const LlmConfig& cfg, const std::string& user_prompt,
                     const ParamSpace& space) {
    std::vector<ChatMessage> messages{{"system", build_system_prompt()}, {"user", user_prompt}};
    for (int ask = 0;; ++ask) {
        ChatRequest req{cfg.model, cfg.temperature, messages};
        std::string reply = transport.complete(req);
        try {
            return parse_proposal(reply, space);
        } catch (const Error& e) {
            if (!is_unusable_reply(e.code()) || ask >= cfg.parse_retries) throw;
            messages.push_back({"assistant", reply});
            messages.push_back({"user", std::string("Your previous reply could not be used (") +
                                            e.what() +
                                            "). Reply again with exactly one JSON object holding "
                                            "the eleven numeric design fields and nothing else."});
        }
    }
}

// ----------------------------------------------------------------------------
// Agents
// ----------------------------------------------------------------------------

BaselineAgent::BaselineAgent(SpecTargets targets, ParamSpace space, CoordinateSearchConfig cfg)
    : targets_(targets), space_(space), cfg_(cfg) {}

AgentStep BaselineAgent::propose(const std::vector<IterationRecord>& history) {
    if (history.empty()) fail(Errc::empty_history, "baseline agent needs at least the seed record");
    // Incumbent: best-scoring converged record; ties keep the earliest. With
    // no converged record yet, search around the seed.
    const IterationRecord* best = nullptr;
    double best_score = std::numeric_limits<double>::infinity();
    for (const IterationRecord& r : history) {
        if (!r.converged || !r.metrics) continue;
        double s = r.score ? *r.score : baseline_score(*r.metrics, targets_);
        if (s < best_score) {
            best_score = s;
            best = &r;
        }
    }
    const DesignParams center = best ? best->params : history.front().params;

    for (int level = 0; level < cfg_.max_shrink_levels; ++level) {
        double frac = cfg_.initial_step_fraction * std::pow(cfg_.shrink_factor, level);
        for (std::size_t f = 0; f < kParamFields.size(); ++f) {
            if (std::string_view(kParamFields[f].name) == "vdd") continue; // boundary condition
            const FieldBounds& b = space_.fields[f];
            double cur = center.*(kParamFields[f].member);
            for (int sgn : {+1, -1}) {
                double next;
                if (b.scale == Scale::Log10)
                    next = std::pow(10.0, std::log10(cur) +
                                              sgn * frac * (std::log10(b.upper) - std::log10(b.lower)));
                else
                    next = cur + sgn * frac * (b.upper - b.lower);
                if (b.integer) next = std::round(next);
                next = std::clamp(next, b.lower, b.upper);
                if (next == cur) continue;
                DesignParams cand = center;
                cand.*(kParamFields[f].member) = next;
                if (!validate(cand, space_).in_bounds) continue;
                bool seen = false;
                for (const IterationRecord& r : history)
                    if (r.params == cand) {
                        seen = true;
                        break;
                    }
                if (seen) continue;
                std::string why = std::string("pattern step: ") + kParamFields[f].name + " " +
                                  disp(cur) + " -> " + disp(next) + " (level " +
                                  std::to_string(level) + ")";
                return {cand, why, false};
            }
        }
    }
    fail(Errc::exhausted_space, "pattern search exhausted all step levels around the incumbent");
}

LlmAgent::LlmAgent(Transport& transport, LlmConfig cfg, SpecTargets targets, ParamSpace space)
    : transport_(transport), cfg_(std::move(cfg)), targets_(targets), space_(space) {}

AgentStep LlmAgent::propose(const std::vector<IterationRecord>& history) {
    if (history.empty()) fail(Errc::empty_history, "llm agent needs at least the seed record");
    if (!history.back().converged) {
        const DesignParams* last_good = nullptr;
        for (auto it = history.rbegin(); it != history.rend(); ++it)
            if (it->converged) {
                last_good = &it->params;
                break;
            }
        const DesignParams& good = last_good ? *last_good : history.front().params;
        std::string prompt =
            build_recovery_prompt(good, history.back().params, history.back().diagnostic, space_);
        Proposal p = propose_llm(transport_, cfg_, prompt, space_);
        return {p.params,
                p.rationale.empty() ? std::string("recovery proposal after non-convergence")
                                    : p.rationale,
                true};
    }
    std::string prompt = build_prompt(history, targets_, space_, cfg_.style);
    Proposal p = propose_llm(transport_, cfg_, prompt, space_);
    return {p.params, p.rationale.empty() ? std::string("model proposal") : p.rationale, false};
}

FallbackAgent::FallbackAgent(Transport& transport, LlmConfig cfg, SpecTargets targets,
                             ParamSpace space, CoordinateSearchConfig search)
    : llm_(transport, std::move(cfg), targets, space), baseline_(targets, space, search) {}

AgentStep FallbackAgent::propose(const std::vector<IterationRecord>& history) {
    try {
        return llm_.propose(history);
    } catch (const Error& e) {
        // Only reply-quality failures divert to the baseline (by now the
        // model has already been re-asked once). Transport and config
        // problems propagate: substituting steps would mask a dead endpoint.
        if (!is_unusable_reply(e.code())) throw;
        AgentStep step = baseline_.propose(history);
        step.rationale = std::string("baseline fallback (model path failed: ") + errc_name(e.code()) +
                         "); " + step.rationale;
        return step;
    }
}

std::unique_ptr<ProposalAgent> make_agent(const json& config, Transport* transport,
                                          const SpecTargets& targets, const ParamSpace& space) {
    if (!config.is_object()) fail(Errc::schema_error, "agent config must be an object");
    std::string kind = config.value("kind", std::string("baseline"));
    json rest = config;
    rest.erase("kind");
    if (kind == "baseline") {
        if (!rest.empty()) fail(Errc::schema_error, "baseline agent takes no extra keys");
        return std::make_unique<BaselineAgent>(targets, space);
    }
    LlmConfig cfg = llm_config_from_json(rest);
    if (!transport) fail(Errc::config_error, "agent kind '" + kind + "' needs a transport");
    if (kind == "llm") return std::make_unique<LlmAgent>(*transport, cfg, targets, space);
    if (kind == "llm-with-baseline-fallback")
        return std::make_unique<FallbackAgent>(*transport, cfg, targets, space);
    fail(Errc::config_error, "unknown agent kind '" + kind + "'");
}

} // namespace nsopt
