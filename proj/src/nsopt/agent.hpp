#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsopt/jsonutil.hpp"
#include "nsopt/params.hpp"
#include "nsopt/postproc.hpp"
#include "nsopt/record.hpp"

namespace nsopt {

// ============================================================================
// Scoring
// ============================================================================

// Hinge distance to the targets: zero when swing, off-current and on-current
// all pass; grows with each shortfall. The on/off gate is implied by the
// current terms up to print-rounding slack, so it carries no term of its own.
double baseline_score(const PerformanceMetrics& m, const SpecTargets& t);

// ============================================================================
// Prompt construction
// ============================================================================

// Quantitative prompts state the targets and measured figures numerically;
// qualitative prompts only say which figures pass and roughly how badly the
// rest miss. Parameter values stay numeric in both.
enum class PromptStyle { Quantitative, Qualitative };

const char* prompt_style_name(PromptStyle s);
PromptStyle prompt_style_from_string(const std::string& s);

// How many trailing history records a prompt includes.
inline constexpr std::size_t kHistoryWindow = 5;

// How many trailing diagnostic lines a recovery prompt includes.
inline constexpr std::size_t kDiagnosticTail = 50;

std::string build_system_prompt();
std::string build_prompt(const std::vector<IterationRecord>& history, const SpecTargets& targets,
                         const ParamSpace& space, PromptStyle style);

// Asks for a design between the last successful one and the failed one. Both
// parameter sets appear verbatim as single-line JSON, followed by the tail of
// the solver diagnostic.
std::string build_recovery_prompt(const DesignParams& last_good, const DesignParams& failed,
                                  const std::string& diagnostic, const ParamSpace& space);

// ============================================================================
// Reply parsing
// ============================================================================

struct Proposal {
    DesignParams params;
    std::string rationale;
};

// Extracts the first balanced JSON object from free-form model text (fences
// and prose around it are fine), requires exactly the eleven design fields
// as JSON numbers plus an optional string rationale, then clamps the result
// into the space. Throws NoJsonFound / ProposalError / UnrepairableParams.
Proposal parse_proposal(const std::string& text, const ParamSpace& space);

// ============================================================================
// Transports
// ============================================================================

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.2;
    std::vector<ChatMessage> messages;
};

json chat_request_to_json(const ChatRequest& req);

class Transport {
public:
    virtual ~Transport() = default;
    // Returns the assistant text. Throws TransportError when no reply can be
    // obtained.
    virtual std::string complete(const ChatRequest& req) = 0;
};

struct LlmConfig {
    std::string base_url = "http://127.0.0.1:8080/v1";
    std::string model = "design-agent";
    double temperature = 0.2;
    std::string api_key_env = "NSOPT_API_KEY"; // name of the env var holding the key
    int transport_attempts = 3;                // network tries per request
    int parse_retries = 1;                     // re-asks after an unusable reply
    PromptStyle style = PromptStyle::Quantitative;
};

LlmConfig llm_config_from_json(const json& j);
json llm_config_to_json(const LlmConfig& cfg);

// Chat-completions client over plain HTTP. Retries transient failures
// (connect errors, 429, 5xx) with exponential backoff; other statuses fail
// at once. TLS endpoints are rejected at construction.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(const LlmConfig& cfg);
    std::string complete(const ChatRequest& req) override;

private:
    LlmConfig cfg_;
    std::string host_; // scheme://host:port for the client
    std::string path_; // prefix + /chat/completions
};

// Forwards to an inner transport and appends {"request", "response"} JSON
// lines to a transcript file.
class RecordingTransport : public Transport {
public:
    RecordingTransport(Transport& inner, std::string transcript_path);
    std::string complete(const ChatRequest& req) override;

private:
    Transport& inner_;
    std::string path_;
};

// Serves recorded replies. Each request consumes the first unconsumed
// transcript entry whose messages match the request's messages exactly, so
// replay survives both re-asks and resumed runs.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::string& transcript_path);
    std::string complete(const ChatRequest& req) override;
    std::size_t remaining() const;

private:
    struct Entry {
        json messages;
        std::string response;
        bool consumed = false;
    };
    std::vector<Entry> entries_;
};

// One proposal round-trip: send the prompt, parse the reply; after an
// unusable reply, re-ask once with a format reminder (cfg.parse_retries).
Proposal propose_llm(Transport& transport, const LlmConfig& cfg, const std::string& user_prompt,
                     const ParamSpace& space);

// ============================================================================
// Agents
// ============================================================================

struct AgentStep {
    DesignParams params;
    std::string rationale;
    bool from_recovery = false;
};

class ProposalAgent {
public:
    virtual ~ProposalAgent() = default;
    virtual const char* name() const = 0;
    // History is the full trajectory so far, seed first, never empty.
    virtual AgentStep propose(const std::vector<IterationRecord>& history) = 0;
};

struct CoordinateSearchConfig {
    double initial_step_fraction = 0.25; // of the field range (log range for log fields)
    double shrink_factor = 0.5;
    int max_shrink_levels = 8;
};

// Deterministic pattern search around the best converged design so far:
// walks fields in declared order, + before -, shrinking the step when every
// neighbor at the current level is exhausted. Supply voltage is a boundary
// condition, not a knob, and is never perturbed. Throws ExhaustedSpace when
// all levels are spent.
class BaselineAgent : public ProposalAgent {
public:
    BaselineAgent(SpecTargets targets, ParamSpace space, CoordinateSearchConfig cfg = {});
    const char* name() const override { return "baseline"; }
    AgentStep propose(const std::vector<IterationRecord>& history) override;

private:
    SpecTargets targets_;
    ParamSpace space_;
    CoordinateSearchConfig cfg_;
};

// Prompts a chat model. When the last record failed to converge, switches to
// the recovery prompt and flags the step accordingly.
class LlmAgent : public ProposalAgent {
public:
    LlmAgent(Transport& transport, LlmConfig cfg, SpecTargets targets, ParamSpace space);
    const char* name() const override { return "llm"; }
    AgentStep propose(const std::vector<IterationRecord>& history) override;

private:
    Transport& transport_;
    LlmConfig cfg_;
    SpecTargets targets_;
    ParamSpace space_;
};

// LlmAgent with BaselineAgent as a stand-in: when the reply is still
// unusable after the re-ask, one baseline step substitutes and the rationale
// says so. Transport and config failures propagate; substituting steps for a
// dead endpoint would silently turn an llm run into a baseline run.
class FallbackAgent : public ProposalAgent {
public:
    FallbackAgent(Transport& transport, LlmConfig cfg, SpecTargets targets, ParamSpace space,
                  CoordinateSearchConfig search = {});
    const char* name() const override { return "llm-with-baseline-fallback"; }
    AgentStep propose(const std::vector<IterationRecord>& history) override;

private:
    LlmAgent llm_;
    BaselineAgent baseline_;
};

// Agent factory. kind is one of "baseline", "llm",
// "llm-with-baseline-fallback"; the latter two need a transport.
std::unique_ptr<ProposalAgent> make_agent(const json& config, Transport* transport,
                                          const SpecTargets& targets, const ParamSpace& space);

} // namespace nsopt
