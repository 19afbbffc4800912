// Command-line front end. Talks to the engine exclusively through the C API
// in nsopt.h; everything else here is argument handling and presentation.
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>
#include "nsopt.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Owns a string handed out by the library.
struct OutString {
    char* ptr = nullptr;
    ~OutString() { nsopt_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

[[noreturn]] void die(const std::string& message) {
    std::cerr << "nsopt: " << message << "\n";
    std::exit(1);
}

void check(nsopt_status rc) {
    if (rc != NSOPT_OK) die(nsopt_last_error());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) die("cannot write " + path);
    out << text;
    if (!out.flush()) die("cannot write " + path);
}

std::string fmt_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// "ss 64.79 <= 72  pass" style rows for the run summary.
void print_metric_rows(const ordered_json* before, const ordered_json& after,
                       const ordered_json& targets) {
    struct Row {
        const char* key;
        const char* label;
        const char* target_key;
        const char* rel;
        const char* verdict_key;
    };
    static const Row rows[] = {
        {"ss_mv_dec", "swing mV/dec", "ss_max", "<=", "ss"},
        {"ioff_a_per_um", "ioff A/um", "ioff_max", "<=", "ioff"},
        {"ion_a_per_um", "ion A/um", "ion_min", ">=", "ion"},
        {"onoff_log10", "on/off decades", "onoff_min", ">=", "onoff"},
    };
    std::printf("  %-16s %12s %12s %14s  %s\n", "figure", "before", "after", "target", "verdict");
    for (const Row& r : rows) {
        std::string b = "-";
        if (before && before->contains(r.key))
            b = fmt_sig((*before)[r.key].get<double>());
        std::string a = fmt_sig(after[r.key].get<double>());
        std::string tgt = "-";
        if (targets.contains(r.target_key))
            tgt = std::string(r.rel) + " " + fmt_sig(targets[r.target_key].get<double>());
        std::string verdict = "-";
        if (after.contains("verdicts"))
            verdict = after["verdicts"][r.verdict_key].get<bool>() ? "pass" : "fail";
        std::printf("  %-16s %12s %12s %14s  %s\n", r.label, b.c_str(), a.c_str(), tgt.c_str(),
                    verdict.c_str());
    }
}

int cmd_optimize(const std::string& config_path, const std::string& run_dir, bool resume,
                 bool replay, bool quiet) {
    nsopt_run* run = nullptr;
    if (resume) {
        check(nsopt_run_resume(run_dir.c_str(), replay ? 1 : 0, &run));
    } else {
        if (config_path.empty()) die("optimize needs --config (or --resume)");
        check(nsopt_run_open(run_dir.c_str(), slurp(config_path).c_str(), &run));
    }
    OutString report_json;
    nsopt_status rc = nsopt_run_execute(run, &report_json.ptr);
    nsopt_run_close(run);
    check(rc);

    ordered_json report = ordered_json::parse(report_json.str());
    const std::string status = report["status"].get<std::string>();
    if (!quiet) {
        std::printf("run: %s\n", run_dir.c_str());
        std::printf("status: %s after %lld iterations (%lld proposals, %.2f s)\n", status.c_str(),
                    report["iterations"].get<long long>(), report["proposals"].get<long long>(),
                    report["wall_time_s"].get<double>());
        if (!report["best_iteration"].is_null())
            std::printf("best iteration: %lld\n", report["best_iteration"].get<long long>());
        if (!report["after"].is_null()) {
            ordered_json targets = ordered_json::object();
            std::ifstream cfg_in(run_dir + "/config.json");
            if (cfg_in) {
                ordered_json cfg = ordered_json::parse(cfg_in, nullptr, false);
                if (cfg.is_object() && cfg.contains("targets")) targets = cfg["targets"];
            }
            const ordered_json* before =
                report["before"].is_null() ? nullptr : &report["before"];
            print_metric_rows(before, report["after"], targets);
        }
    } else {
        std::printf("%s\n", report.dump().c_str());
    }
    return status == "success" ? 0 : 2;
}

int cmd_simulate(const std::string& params_path, const std::string& sweep_path,
                 const std::string& out_path) {
    std::string params = slurp(params_path);
    std::string sweep;
    if (!sweep_path.empty()) sweep = slurp(sweep_path);
    OutString outcome;
    check(nsopt_simulate(params.c_str(), sweep_path.empty() ? nullptr : sweep.c_str(),
                         &outcome.ptr));
    std::string text = outcome.str() + "\n";
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        spill(out_path, text);
    ordered_json doc = ordered_json::parse(outcome.str());
    return doc["converged"].get<bool>() ? 0 : 2;
}

// Accepts either the JSON curve shape or a two-column CSV (vg,id) with --vd.
int cmd_metrics(const std::string& iv_path, const std::string& targets_path, double vd,
                bool have_vd) {
    std::string text = slurp(iv_path);
    std::string iv_json;
    ordered_json parsed = ordered_json::parse(text, nullptr, false);
    if (parsed.is_object()) {
        iv_json = text;
    } else {
        if (!have_vd) die("CSV input needs --vd <drain bias>");
        ordered_json points = ordered_json::array();
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) ||
                                  line[0] == '-' || line[0] == '+' || line[0] == '.'))
                continue; // header or comment
            double vg = 0.0, id = 0.0;
            if (std::sscanf(line.c_str(), "%lf , %lf", &vg, &id) != 2 &&
                std::sscanf(line.c_str(), "%lf %lf", &vg, &id) != 2)
                die("cannot parse curve line: " + line);
            points.push_back(ordered_json::array({vg, id}));
        }
        ordered_json doc{{"vd", vd}, {"points", points}};
        iv_json = doc.dump();
    }
    std::string targets;
    if (!targets_path.empty()) targets = slurp(targets_path);
    OutString metrics;
    check(nsopt_extract_metrics(iv_json.c_str(), targets_path.empty() ? nullptr : targets.c_str(),
                                &metrics.ptr));
    std::printf("%s\n", metrics.str().c_str());
    ordered_json doc = ordered_json::parse(metrics.str());
    bool meets = doc.contains("verdicts") && doc["verdicts"]["meets_all"].get<bool>();
    return meets ? 0 : 3;
}

int cmd_deckgen(const std::string& params_path, const std::string& sweep_path,
                const std::string& mesh, const std::string& models, const std::string& out_dir,
                const std::string& name, const std::string& parse_path,
                const std::string& parse_kind) {
    if (!parse_path.empty()) {
        std::string deck = slurp(parse_path);
        OutString info;
        check(nsopt_parse_deck(deck.c_str(), parse_kind.c_str(), &info.ptr));
        std::printf("%s\n", ordered_json::parse(info.str()).dump(2).c_str());
        return 0;
    }
    if (params_path.empty()) die("deckgen needs --params (or --parse)");
    std::string params = slurp(params_path);
    std::string sweep;
    if (!sweep_path.empty()) sweep = slurp(sweep_path);
    OutString sde, sdevice;
    check(nsopt_generate_sde(params.c_str(), mesh.c_str(), &sde.ptr));
    check(nsopt_generate_sdevice(params.c_str(), sweep_path.empty() ? nullptr : sweep.c_str(),
                                 models.c_str(), &sdevice.ptr));
    if (out_dir.empty()) {
        std::fputs(sde.str().c_str(), stdout);
        std::fputs(sdevice.str().c_str(), stdout);
    } else {
        std::string sde_path = out_dir + "/" + name + "_dvs.cmd";
        std::string sdevice_path = out_dir + "/" + name + "_des.cmd";
        spill(sde_path, sde.str());
        spill(sdevice_path, sdevice.str());
        std::printf("%s\n%s\n", sde_path.c_str(), sdevice_path.c_str());
    }
    return 0;
}

int cmd_corpus(const std::string& config_path, const std::string& out_path) {
    std::string config = slurp(config_path);
    OutString result;
    check(nsopt_build_corpus(config.c_str(), &result.ptr));
    ordered_json doc = ordered_json::parse(result.str());
    spill(out_path, doc["jsonl"].get<std::string>());
    std::printf("%lld records -> %s\n", doc["record_count"].get<long long>(), out_path.c_str());
    for (const ordered_json& skip : doc["skipped"])
        std::fprintf(stderr, "skipped variant %lld sweep %lld: %s\n",
                     skip["variant_index"].get<long long>(),
                     skip["sweep_index"].get<long long>(),
                     skip["message"].get<std::string>().c_str());
    return 0;
}

int cmd_plot(const std::string& run_dir, const std::string& out_dir, int iteration) {
    OutString files;
    check(nsopt_plot_run(run_dir.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), iteration,
                         &files.ptr));
    ordered_json doc = ordered_json::parse(files.str());
    for (const ordered_json& f : doc["written"]) std::printf("%s\n", f.get<std::string>().c_str());
    return 0;
}

int cmd_validate(const std::string& params_path, const std::string& space_path) {
    std::string params = slurp(params_path);
    std::string space;
    if (!space_path.empty()) space = slurp(space_path);
    OutString report;
    check(nsopt_validate_params(params.c_str(), space_path.empty() ? nullptr : space.c_str(),
                                &report.ptr));
    ordered_json doc = ordered_json::parse(report.str());
    std::printf("%s\n", doc.dump(2).c_str());
    return doc["in_bounds"].get<bool>() ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop nanosheet transistor design engine"};
    app.set_version_flag("--version", std::string(nsopt_version()));
    app.require_subcommand(1);

    // optimize
    std::string opt_config, opt_run_dir;
    bool opt_resume = false, opt_replay = false, opt_quiet = false;
    CLI::App* optimize = app.add_subcommand("optimize", "Run or resume an optimization loop");
    optimize->add_option("--config", opt_config, "Run config JSON (ignored with --resume)");
    optimize->add_option("--run-dir", opt_run_dir, "Run directory")->required();
    optimize->add_flag("--resume", opt_resume, "Reuse the config stored in the run directory");
    optimize->add_flag("--replay", opt_replay,
                       "Serve model traffic from the recorded transcript (implies --resume)");
    optimize->add_flag("--json", opt_quiet, "Print the raw report document instead of a summary");

    // simulate
    std::string sim_params, sim_sweep, sim_out;
    CLI::App* simulate = app.add_subcommand("simulate", "Evaluate one design with the built-in solver");
    simulate->add_option("--params", sim_params, "Design parameter JSON")->required();
    simulate->add_option("--sweep", sim_sweep, "Sweep config JSON (default: transfer to vdd)");
    simulate->add_option("-o,--out", sim_out, "Write the outcome document here instead of stdout");

    // metrics
    std::string met_iv, met_targets;
    double met_vd = 0.0;
    CLI::App* metrics = app.add_subcommand("metrics", "Extract figures of merit from a curve");
    metrics->add_option("--iv", met_iv, "Curve file: JSON {vd, points} or vg,id CSV")->required();
    CLI::Option* vd_opt = metrics->add_option("--vd", met_vd, "Drain bias for CSV input");
    metrics->add_option("--targets", met_targets, "Target JSON (default: shipped targets)");

    // deckgen
    std::string dg_params, dg_sweep, dg_mesh = "default", dg_models = "dd", dg_out, dg_name = "nsfet";
    std::string dg_parse, dg_kind = "sde";
    CLI::App* deckgen = app.add_subcommand("deckgen", "Emit or parse simulator command files");
    deckgen->add_option("--params", dg_params, "Design parameter JSON");
    deckgen->add_option("--sweep", dg_sweep, "Sweep config JSON");
    deckgen->add_option("--mesh", dg_mesh, "coarse|default|fine");
    deckgen->add_option("--models", dg_models, "dd|dd-quantum");
    deckgen->add_option("-o,--out-dir", dg_out, "Write <name>_dvs.cmd and <name>_des.cmd here");
    deckgen->add_option("--name", dg_name, "Basename for emitted decks");
    deckgen->add_option("--parse", dg_parse, "Parse this deck instead of generating");
    deckgen->add_option("--kind", dg_kind, "Deck kind for --parse: sde|sdevice");

    // corpus
    std::string cor_config, cor_out;
    CLI::App* corpus = app.add_subcommand("corpus", "Expand design variants into a deck corpus");
    corpus->add_option("--config", cor_config, "Corpus config JSON")->required();
    corpus->add_option("-o,--out", cor_out, "Output JSONL path")->required();

    // plot
    std::string plot_run_dir, plot_out;
    int plot_iter = -1;
    CLI::App* plot = app.add_subcommand("plot", "Render plots for a finished run");
    plot->add_option("--run-dir", plot_run_dir, "Run directory")->required();
    plot->add_option("-o,--out-dir", plot_out, "Plot directory (default: <run>/plots)");
    plot->add_option("--iteration", plot_iter, "Iteration to detail (-1 = best)");

    // validate
    std::string val_params, val_space;
    CLI::App* validate = app.add_subcommand("validate", "Check a design against a search space");
    validate->add_option("--params", val_params, "Design parameter JSON")->required();
    validate->add_option("--space", val_space, "Search space JSON (default: shipped space)");

    CLI11_PARSE(app, argc, argv);

    if (optimize->parsed())
        return cmd_optimize(opt_config, opt_run_dir, opt_resume || opt_replay, opt_replay,
                            opt_quiet);
    if (simulate->parsed()) return cmd_simulate(sim_params, sim_sweep, sim_out);
    if (metrics->parsed()) return cmd_metrics(met_iv, met_targets, met_vd, vd_opt->count() > 0);
    if (deckgen->parsed())
        return cmd_deckgen(dg_params, dg_sweep, dg_mesh, dg_models, dg_out, dg_name, dg_parse,
                           dg_kind);
    if (corpus->parsed()) return cmd_corpus(cor_config, cor_out);
    if (plot->parsed()) return cmd_plot(plot_run_dir, plot_out, plot_iter);
    if (validate->parsed()) return cmd_validate(val_params, val_space);
    return 1;
}
