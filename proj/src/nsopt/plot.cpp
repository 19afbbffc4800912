#include "nsopt/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "nsopt/errors.hpp"
#include "nsopt/jsonutil.hpp"
#include "nsopt/orchestrator.hpp"

namespace nsopt {

namespace {

std::string n3(double v) { // axis-label precision
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string n1(double v) { // pixel-coordinate precision
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

// One plot panel: data ranges mapped onto a pixel box (py0 is the top edge).
struct Frame {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double px0 = 0, px1 = 1, py0 = 0, py1 = 1;
    double sx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double sy(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        double mid = lo;
        lo = mid - 0.5;
        hi = mid + 0.5;
        return;
    }
    double pad = (hi - lo) * 0.08;
    lo -= pad;
    hi += pad;
}

void draw_axes(std::string& s, const Frame& f, const std::string& title, const std::string& ylabel,
               bool log_ticks) {
    s += "<rect x=\"" + n1(f.px0) + "\" y=\"" + n1(f.py0) + "\" width=\"" + n1(f.px1 - f.px0) +
         "\" height=\"" + n1(f.py1 - f.py0) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + n1((f.px0 + f.px1) / 2) + "\" y=\"" + n1(f.py0 - 8) +
         "\" text-anchor=\"middle\" font-size=\"13\" fill=\"#222\">" + title + "</text>\n";
    s += "<text x=\"" + n1(f.px0 - 44) + "\" y=\"" + n1((f.py0 + f.py1) / 2) +
         "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#222\" transform=\"rotate(-90 " +
         n1(f.px0 - 44) + " " + n1((f.py0 + f.py1) / 2) + ")\">" + ylabel + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        s += "<text x=\"" + n1(f.sx(xv)) + "\" y=\"" + n1(f.py1 + 14) +
             "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#444\">" + n3(xv) + "</text>\n";
        std::string ylab = log_ticks ? ("1e" + n3(yv)) : n3(yv);
        s += "<text x=\"" + n1(f.px0 - 6) + "\" y=\"" + n1(f.sy(yv) + 3) +
             "\" text-anchor=\"end\" font-size=\"10\" fill=\"#444\">" + ylab + "</text>\n";
        s += "<line x1=\"" + n1(f.px0) + "\" y1=\"" + n1(f.sy(yv)) + "\" x2=\"" + n1(f.px1) +
             "\" y2=\"" + n1(f.sy(yv)) + "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    }
}

void draw_target(std::string& s, const Frame& f, double y) {
    if (y < f.y0 || y > f.y1) return;
    s += "<line x1=\"" + n1(f.px0) + "\" y1=\"" + n1(f.sy(y)) + "\" x2=\"" + n1(f.px1) + "\" y2=\"" +
         n1(f.sy(y)) + "\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>\n";
}

// Values indexed by iteration; absent entries break the line.
void draw_series(std::string& s, const Frame& f, const std::vector<std::optional<double>>& values,
                 const char* color) {
    std::string seg;
    int seg_count = 0;
    auto flush = [&]() {
        if (seg_count >= 2)
            s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                 "\" stroke-width=\"1.5\" points=\"" + seg + "\"/>\n";
        seg.clear();
        seg_count = 0;
    };
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) {
            flush();
            double xm = f.sx(static_cast<double>(i));
            s += "<path d=\"M " + n1(xm - 3) + " " + n1(f.py1 - 6) + " L " + n1(xm + 3) + " " +
                 n1(f.py1 - 12) + " M " + n1(xm - 3) + " " + n1(f.py1 - 12) + " L " + n1(xm + 3) +
                 " " + n1(f.py1 - 6) + "\" stroke=\"#c0392b\" stroke-width=\"1.2\"/>\n";
            continue;
        }
        double px = f.sx(static_cast<double>(i));
        double py = f.sy(*values[i]);
        if (!seg.empty()) seg += ' ';
        seg += n1(px) + "," + n1(py);
        ++seg_count;
        s += "<circle cx=\"" + n1(px) + "\" cy=\"" + n1(py) + "\" r=\"2.5\" fill=\"" +
             std::string(color) + "\"/>\n";
    }
    flush();
}

} // namespace

std::string trajectory_csv(const std::vector<IterationRecord>& records) {
    std::string s = "iteration,converged,ss_mv_dec,ioff_a_per_um,ion_a_per_um,onoff_log10,score\n";
    for (const IterationRecord& r : records) {
        s += std::to_string(r.iteration);
        s += r.converged ? ",1," : ",0,";
        if (r.converged && r.metrics) {
            const PerformanceMetrics& m = *r.metrics;
            s += format_double(m.ss_mv_dec) + "," + format_double(m.ioff_a_per_um) + "," +
                 format_double(m.ion_a_per_um) + "," + format_double(m.onoff_log10) + ",";
            if (r.score) s += format_double(*r.score);
        } else {
            s += ",,,,";
        }
        s += '\n';
    }
    return s;
}

std::string trajectory_svg(const std::vector<IterationRecord>& records, const SpecTargets& targets) {
    if (records.empty()) fail(Errc::empty_selection, "no iterations to plot");
    const std::size_t n = records.size();

    struct Panel {
        const char* title;
        const char* ylabel;
        bool log_scale;
        double target;
        const char* color;
        std::vector<std::optional<double>> values;
    };
    std::array<Panel, 4> panels{{
        {"subthreshold swing", "mV/dec", false, targets.ss_max, "#2467a8", {}},
        {"off-current", "A/um", true, std::log10(targets.ioff_max), "#b06c1b", {}},
        {"on-current", "A/um", true, std::log10(targets.ion_min), "#2c7d4f", {}},
        {"on/off ratio", "decades", false, targets.onoff_min, "#6a4fa0", {}},
    }};
    for (const IterationRecord& r : records) {
        const PerformanceMetrics* m = (r.converged && r.metrics) ? &*r.metrics : nullptr;
        panels[0].values.push_back(m ? std::optional<double>(m->ss_mv_dec) : std::nullopt);
        panels[1].values.push_back(m ? std::optional<double>(std::log10(m->ioff_a_per_um))
                                     : std::nullopt);
        panels[2].values.push_back(m ? std::optional<double>(std::log10(m->ion_a_per_um))
                                     : std::nullopt);
        panels[3].values.push_back(m ? std::optional<double>(m->onoff_log10) : std::nullopt);
    }

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 680\" "
                    "font-family=\"sans-serif\">\n<rect width=\"960\" height=\"680\" "
                    "fill=\"white\"/>\n";
    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        Panel& p = panels[pi];
        double lo = p.target, hi = p.target;
        bool any = false;
        for (auto& v : p.values)
            if (v) {
                lo = any ? std::min(lo, *v) : std::min(*v, p.target);
                hi = any ? std::max(hi, *v) : std::max(*v, p.target);
                any = true;
            }
        if (!any) {
            lo = p.target - 1;
            hi = p.target + 1;
        }
        pad_range(lo, hi);
        Frame f;
        f.x0 = 0;
        f.x1 = n > 1 ? static_cast<double>(n - 1) : 1.0;
        f.y0 = lo;
        f.y1 = hi;
        f.px0 = 70 + 480.0 * (pi % 2);
        f.px1 = f.px0 + 360;
        f.py0 = 40 + 330.0 * (pi / 2);
        f.py1 = f.py0 + 250;
        draw_axes(s, f, p.title, p.ylabel, p.log_scale);
        draw_target(s, f, p.target);
        draw_series(s, f, p.values, p.color);
        s += "<text x=\"" + n1((f.px0 + f.px1) / 2) + "\" y=\"" + n1(f.py1 + 30) +
             "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#222\">iteration</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string iv_svg(const IVCurve& iv) {
    if (iv.vg.size() < 2) fail(Errc::empty_selection, "transfer curve has fewer than two points");
    Frame f;
    f.x0 = iv.vg.front();
    f.x1 = iv.vg.back();
    double lo = std::log10(iv.id[0]), hi = lo;
    for (double id : iv.id) {
        lo = std::min(lo, std::log10(id));
        hi = std::max(hi, std::log10(id));
    }
    pad_range(lo, hi);
    f.y0 = lo;
    f.y1 = hi;
    f.px0 = 80;
    f.px1 = 600;
    f.py0 = 50;
    f.py1 = 420;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 660 480\" "
                    "font-family=\"sans-serif\">\n<rect width=\"660\" height=\"480\" "
                    "fill=\"white\"/>\n";
    draw_axes(s, f, "transfer characteristic, vd = " + n3(iv.vd) + " V", "Id (A/um)", true);
    std::string pts;
    for (std::size_t i = 0; i < iv.vg.size(); ++i) {
        if (!pts.empty()) pts += ' ';
        pts += n1(f.sx(iv.vg[i])) + "," + n1(f.sy(std::log10(iv.id[i])));
    }
    s += "<polyline fill=\"none\" stroke=\"#2467a8\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    s += "<text x=\"340\" y=\"460\" text-anchor=\"middle\" font-size=\"11\" "
         "fill=\"#222\">Vg (V)</text>\n</svg>\n";
    return s;
}

std::string bands_svg(const BandDiagram& b) {
    if (b.x.size() < 2) fail(Errc::empty_selection, "band profile has fewer than two points");
    Frame f;
    f.x0 = b.x.front();
    f.x1 = b.x.back();
    double lo = b.ev.front(), hi = b.ec.front();
    for (std::size_t i = 0; i < b.x.size(); ++i) {
        lo = std::min({lo, b.ev[i], b.efn[i], b.efp[i]});
        hi = std::max({hi, b.ec[i], b.efn[i], b.efp[i]});
    }
    pad_range(lo, hi);
    f.y0 = lo;
    f.y1 = hi;
    f.px0 = 80;
    f.px1 = 600;
    f.py0 = 50;
    f.py1 = 420;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 660 480\" "
                    "font-family=\"sans-serif\">\n<rect width=\"660\" height=\"480\" "
                    "fill=\"white\"/>\n";
    draw_axes(s, f,
              "band profile, vg = " + n3(b.vg) + " V, vd = " + n3(b.vd) + " V", "energy (eV)",
              false);
    struct Series {
        const std::vector<double>* y;
        const char* color;
        const char* label;
        const char* dash;
    };
    std::array<Series, 4> series{{{&b.ec, "#2467a8", "Ec", ""},
                                  {&b.ev, "#2c7d4f", "Ev", ""},
                                  {&b.efn, "#b06c1b", "EFn", "5 3"},
                                  {&b.efp, "#6a4fa0", "EFp", "5 3"}}};
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& sr = series[si];
        std::string pts;
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            if (!pts.empty()) pts += ' ';
            pts += n1(f.sx(b.x[i])) + "," + n1(f.sy((*sr.y)[i]));
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(sr.color) + "\" stroke-width=\"1.5\"";
        if (sr.dash[0]) s += " stroke-dasharray=\"" + std::string(sr.dash) + "\"";
        s += " points=\"" + pts + "\"/>\n";
        double ly = 70.0 + 16.0 * static_cast<double>(si);
        s += "<line x1=\"610\" y1=\"" + n1(ly - 4) + "\" x2=\"630\" y2=\"" + n1(ly - 4) +
             "\" stroke=\"" + sr.color + "\" stroke-width=\"1.5\"";
        if (sr.dash[0]) s += " stroke-dasharray=\"" + std::string(sr.dash) + "\"";
        s += "/>\n<text x=\"634\" y=\"" + n1(ly) + "\" font-size=\"10\" fill=\"#222\">" + sr.label +
             "</text>\n";
    }
    s += "<text x=\"340\" y=\"460\" text-anchor=\"middle\" font-size=\"11\" "
         "fill=\"#222\">x (um)</text>\n</svg>\n";
    return s;
}

std::vector<std::string> plot_run(const std::string& run_dir, const std::string& out_dir,
                                  int iteration) {
    namespace fs = std::filesystem;
    const std::string dest = out_dir.empty() ? run_dir + "/plots" : out_dir;
    const std::string trajectory_path = run_dir + "/trajectory.jsonl";
    if (!fs::exists(trajectory_path))
        fail(Errc::io_error, "no trajectory.jsonl in run directory: " + run_dir);
    std::vector<IterationRecord> records = load_trajectory(read_text_file(trajectory_path));
    if (records.empty()) fail(Errc::empty_selection, "trajectory is empty");

    RunConfig cfg = run_config_from_json(parse_json(read_text_file(run_dir + "/config.json")));

    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        std::string path = dest + "/" + name;
        write_text_file(path, content);
        written.push_back(path);
    };
    emit("trajectory.csv", trajectory_csv(records));
    emit("trajectory.svg", trajectory_svg(records, cfg.targets));

    // Pick the iteration whose curve gets plotted.
    int chosen = iteration;
    if (chosen < 0) {
        const std::string report_path = run_dir + "/report.json";
        if (fs::exists(report_path)) {
            RunReport rep = report_from_json(parse_json(read_text_file(report_path)));
            if (rep.best_iteration) chosen = *rep.best_iteration;
        }
        if (chosen < 0) // no report yet: latest converged record
            for (const IterationRecord& r : records)
                if (r.converged) chosen = r.iteration;
        if (chosen < 0) return written; // nothing converged; trajectory plots only
    }
    if (chosen >= static_cast<int>(records.size()))
        fail(Errc::empty_selection, "iteration " + std::to_string(chosen) + " is not in the trajectory");
    const IterationRecord& rec = records[static_cast<std::size_t>(chosen)];
    if (!rec.converged)
        fail(Errc::empty_selection,
             "iteration " + std::to_string(chosen) + " did not converge; nothing to plot");

    const std::string results_path = run_dir + "/results/iter_" + std::to_string(chosen) + ".json";
    json doc = parse_json(read_text_file(results_path));
    IVCurve iv;
    iv.vd = doc["iv"]["vd"].get<double>();
    iv.temperature = doc["iv"]["temperature"].get<double>();
    for (const json& pt : doc["iv"]["points"]) {
        iv.vg.push_back(pt[0].get<double>());
        iv.id.push_back(pt[1].get<double>());
    }
    std::string tag = "iter_" + std::to_string(chosen);
    emit(tag + "_iv.csv", iv_to_csv(iv));
    emit(tag + "_iv.svg", iv_svg(iv));

    if (std::holds_alternative<SurrogateBackend>(cfg.backend)) {
        const auto& coeff = std::get<SurrogateBackend>(cfg.backend).coefficients;
        BandDiagram off = band_diagram_with(coeff, rec.params, 0.0, rec.params.vdd);
        BandDiagram on = band_diagram_with(coeff, rec.params, rec.params.vdd, rec.params.vdd);
        emit(tag + "_bands_off.csv", band_to_csv(off));
        emit(tag + "_bands_off.svg", bands_svg(off));
        emit(tag + "_bands_on.csv", band_to_csv(on));
        emit(tag + "_bands_on.svg", bands_svg(on));
    }
    return written;
}

} // namespace nsopt
