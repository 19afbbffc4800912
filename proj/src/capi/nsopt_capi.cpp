#include "nsopt.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "nsopt/agent.hpp"
#include "nsopt/backend.hpp"
#include "nsopt/deckgen.hpp"
#include "nsopt/errors.hpp"
#include "nsopt/jsonutil.hpp"
#include "nsopt/orchestrator.hpp"
#include "nsopt/params.hpp"
#include "nsopt/plot.hpp"
#include "nsopt/postproc.hpp"
#include "nsopt/surrogate.hpp"

using nsopt::Errc;
using nsopt::json;

struct nsopt_run {
    std::string dir;
    nsopt::RunConfig cfg;
    bool replay = false;
};

namespace {

thread_local std::string g_last_error;

nsopt_status map_code(Errc c) {
    switch (c) {
    case Errc::invalid_params:
    case Errc::unrepairable_params:
    case Errc::invalid_targets:
    case Errc::invalid_sweep:
    case Errc::invariant_error:
    case Errc::range_error:
    case Errc::degenerate_curve:
    case Errc::non_monotonic:
        return NSOPT_ERR_VALIDATION;
    case Errc::parse_error:
    case Errc::schema_error:
    case Errc::no_json_found:
    case Errc::corrupt_trajectory:
        return NSOPT_ERR_PARSE;
    case Errc::unsupported_sweep:
    case Errc::empty_selection:
    case Errc::config_error:
    case Errc::exhausted_space:
        return NSOPT_ERR_CONFIG;
    case Errc::transport_error:
    case Errc::proposal_error:
    case Errc::empty_history:
        return NSOPT_ERR_AGENT;
    case Errc::io_error:
        return NSOPT_ERR_IO;
    case Errc::internal_error:
        return NSOPT_ERR_INTERNAL;
    }
    return NSOPT_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nsopt_status hand_out(const std::string& s, char** out) {
    *out = dup_string(s);
    if (!*out) {
        g_last_error = "out of memory";
        return NSOPT_ERR_INTERNAL;
    }
    return NSOPT_OK;
}

template <typename F>
nsopt_status guarded(F&& body) {
    try {
        return body();
    } catch (const nsopt::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NSOPT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return NSOPT_ERR_INTERNAL;
    }
}

nsopt_status need(bool ok, const char* what) {
    if (ok) return NSOPT_OK;
    g_last_error = std::string(what) + " must not be NULL";
    return NSOPT_ERR_INVALID_ARGUMENT;
}

nsopt::ParamSpace space_or_default(const char* space_json) {
    if (!space_json) return nsopt::default_param_space();
    return nsopt::space_from_json(nsopt::parse_json(space_json));
}

// Default transfer sweep topping out at the design's own supply.
nsopt::SweepConfig sweep_or_default(const char* sweep_json, const nsopt::DesignParams& p) {
    nsopt::SweepConfig s;
    if (sweep_json) {
        s = nsopt::sweep_from_json(nsopt::parse_json(sweep_json));
    } else {
        s.stop = p.vdd;
        s.fixed_bias = p.vdd;
    }
    nsopt::validate_sweep(s);
    return s;
}

} // namespace

extern "C" {

const char* nsopt_version(void) { return "1.0.0"; }

const char* nsopt_last_error(void) { return g_last_error.c_str(); }

void nsopt_string_free(char* s) { std::free(s); }

nsopt_status nsopt_validate_params(const char* params_json, const char* space_json,
                                   char** report_json_out) {
    if (auto rc = need(params_json && report_json_out, "params_json/report_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DesignParams p = nsopt::params_from_json(nsopt::parse_json(params_json));
        nsopt::ParamSpace space = space_or_default(space_json);
        nsopt::ValidationResult r = nsopt::validate(p, space);
        json violations = json::array();
        for (const nsopt::Violation& v : r.violations)
            violations.push_back(json{{"field", v.field},
                                      {"message", v.message},
                                      {"value", v.value},
                                      {"lower", v.lower},
                                      {"upper", v.upper}});
        json doc{{"in_bounds", r.in_bounds}, {"violations", violations}};
        return hand_out(doc.dump(), report_json_out);
    });
}

nsopt_status nsopt_clamp_params(const char* params_json, const char* space_json,
                                char** params_json_out) {
    if (auto rc = need(params_json && params_json_out, "params_json/params_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DesignParams p = nsopt::params_from_json(nsopt::parse_json(params_json));
        nsopt::DesignParams clamped = nsopt::clamp(p, space_or_default(space_json));
        return hand_out(nsopt::params_to_json(clamped).dump(), params_json_out);
    });
}

nsopt_status nsopt_generate_sde(const char* params_json, const char* mesh, char** deck_out) {
    if (auto rc = need(params_json && mesh && deck_out, "params_json/mesh/deck_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DesignParams p = nsopt::params_from_json(nsopt::parse_json(params_json));
        return hand_out(nsopt::generate_sde(p, nsopt::mesh_tag_from_string(mesh)), deck_out);
    });
}

nsopt_status nsopt_generate_sdevice(const char* params_json, const char* sweep_json,
                                    const char* models, char** deck_out) {
    if (auto rc = need(params_json && models && deck_out, "params_json/models/deck_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DesignParams p = nsopt::params_from_json(nsopt::parse_json(params_json));
        nsopt::SweepConfig sweep = sweep_or_default(sweep_json, p);
        return hand_out(
            nsopt::generate_sdevice(p, sweep, nsopt::models_tag_from_string(models)), deck_out);
    });
}

nsopt_status nsopt_parse_deck(const char* deck_text, const char* kind, char** info_json_out) {
    if (auto rc = need(deck_text && kind && info_json_out, "deck_text/kind/info_json_out"))
        return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DeckKind k;
        if (std::strcmp(kind, "sde") == 0)
            k = nsopt::DeckKind::Sde;
        else if (std::strcmp(kind, "sdevice") == 0)
            k = nsopt::DeckKind::Sdevice;
        else {
            g_last_error = "kind must be \"sde\" or \"sdevice\"";
            return NSOPT_ERR_INVALID_ARGUMENT;
        }
        nsopt::DeckInfo info = nsopt::parse_deck(deck_text, k);
        json params = json::object();
        for (const auto& [name, value] : info.params) params[name] = value;
        json doc{{"params", params}, {"diagnostics", info.diagnostics}};
        return hand_out(doc.dump(), info_json_out);
    });
}

nsopt_status nsopt_build_corpus(const char* config_json, char** result_json_out) {
    if (auto rc = need(config_json && result_json_out, "config_json/result_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::CorpusConfig cfg = nsopt::corpus_config_from_json(nsopt::parse_json(config_json));
        nsopt::CorpusResult result = nsopt::run_corpus(cfg);
        json skipped = json::array();
        for (const nsopt::CorpusSkip& s : result.skipped)
            skipped.push_back(json{{"variant_index", s.variant_index},
                                   {"sweep_index", s.sweep_index},
                                   {"message", s.message}});
        json doc{{"record_count", result.records.size()},
                 {"skipped", skipped},
                 {"jsonl", nsopt::corpus_to_jsonl(result.records)}};
        return hand_out(doc.dump(), result_json_out);
    });
}

nsopt_status nsopt_simulate(const char* params_json, const char* sweep_json,
                            char** outcome_json_out) {
    if (auto rc = need(params_json && outcome_json_out, "params_json/outcome_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::DesignParams p = nsopt::params_from_json(nsopt::parse_json(params_json));
        nsopt::SweepConfig sweep = sweep_or_default(sweep_json, p);
        if (sweep.kind != nsopt::SweepKind::IdVg)
            nsopt::fail(Errc::unsupported_sweep,
                        "nsopt_simulate evaluates transfer sweeps only");
        nsopt::SimulationOutcome outcome = nsopt::simulate_iv(p, sweep);
        json doc;
        if (const auto* nc = std::get_if<nsopt::NonConvergent>(&outcome)) {
            doc = json{{"converged", false}, {"diagnostic", nc->diagnostic}};
        } else {
            const auto& conv = std::get<nsopt::Converged>(outcome);
            nsopt::PerformanceMetrics m = nsopt::with_verdicts(
                nsopt::extract_metrics(conv.iv, conv.iv.vd), nsopt::SpecTargets{});
            json result = nsopt::package_results(m, conv.iv, nsopt::effective_width_um(p),
                                                 conv.bands_on ? &*conv.bands_on : nullptr,
                                                 conv.bands_off ? &*conv.bands_off : nullptr);
            doc = json{{"converged", true}, {"result", result}};
        }
        return hand_out(doc.dump(), outcome_json_out);
    });
}

nsopt_status nsopt_extract_metrics(const char* iv_json, const char* targets_json,
                                   char** metrics_json_out) {
    if (auto rc = need(iv_json && metrics_json_out, "iv_json/metrics_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        json j = nsopt::parse_json(iv_json);
        if (!j.is_object() || !j.contains("vd") || !j.contains("points"))
            nsopt::fail(Errc::schema_error, "iv document needs 'vd' and 'points'");
        nsopt::IVCurve iv;
        iv.vd = j["vd"].get<double>();
        iv.temperature = j.value("temperature", 300.0);
        if (!j["points"].is_array()) nsopt::fail(Errc::schema_error, "points must be an array");
        for (const json& pt : j["points"]) {
            if (!pt.is_array() || pt.size() != 2)
                nsopt::fail(Errc::schema_error, "each point must be a [vg, id] pair");
            iv.vg.push_back(pt[0].get<double>());
            iv.id.push_back(pt[1].get<double>());
        }
        nsopt::SpecTargets targets;
        if (targets_json) targets = nsopt::targets_from_json(nsopt::parse_json(targets_json));
        nsopt::PerformanceMetrics m =
            nsopt::with_verdicts(nsopt::extract_metrics(iv, iv.vd), targets);
        return hand_out(nsopt::metrics_to_json(m).dump(), metrics_json_out);
    });
}

nsopt_status nsopt_run_open(const char* run_dir, const char* config_json, nsopt_run** run_out) {
    if (auto rc = need(run_dir && config_json && run_out, "run_dir/config_json/run_out")) return rc;
    return guarded([&]() -> nsopt_status {
        auto run = new nsopt_run{run_dir,
                                 nsopt::run_config_from_json(nsopt::parse_json(config_json)), false};
        *run_out = run;
        return NSOPT_OK;
    });
}

nsopt_status nsopt_run_resume(const char* run_dir, int replay, nsopt_run** run_out) {
    if (auto rc = need(run_dir && run_out, "run_dir/run_out")) return rc;
    return guarded([&]() -> nsopt_status {
        std::string config_path = std::string(run_dir) + "/config.json";
        if (!std::filesystem::exists(config_path))
            nsopt::fail(nsopt::Errc::config_error, "no config.json in run directory: " + std::string(run_dir));
        nsopt::RunConfig cfg =
            nsopt::run_config_from_json(nsopt::parse_json(nsopt::read_text_file(config_path)));
        *run_out = new nsopt_run{run_dir, std::move(cfg), replay != 0};
        return NSOPT_OK;
    });
}

nsopt_status nsopt_run_execute(nsopt_run* run, char** report_json_out) {
    if (auto rc = need(run && report_json_out, "run/report_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        nsopt::RunResult result = nsopt::run_loop(run->dir, run->cfg, nullptr, run->replay);
        return hand_out(nsopt::report_to_json(result.report).dump(), report_json_out);
    });
}

void nsopt_run_close(nsopt_run* run) { delete run; }

nsopt_status nsopt_plot_run(const char* run_dir, const char* out_dir, int iteration,
                            char** files_json_out) {
    if (auto rc = need(run_dir && files_json_out, "run_dir/files_json_out")) return rc;
    return guarded([&]() -> nsopt_status {
        std::vector<std::string> files =
            nsopt::plot_run(run_dir, out_dir ? out_dir : "", iteration);
        json doc{{"written", files}};
        return hand_out(doc.dump(), files_json_out);
    });
}

} // extern "C"
