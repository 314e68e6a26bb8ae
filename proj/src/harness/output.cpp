#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "cip/harness.hpp"

namespace cip::harness {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    out << content;
    if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::io, "cannot create directory " + dir.string());
}

std::string file_safe(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string svg_panel(const std::vector<Curve>& panel, std::size_t L, const std::string& title) {
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& c : panel) {
        for (const auto& p : c.points) {
            if (!p.mean) continue;
            if (first) lo = hi = *p.mean;
            lo = std::min(lo, *p.mean);
            hi = std::max(hi, *p.mean);
            first = false;
        }
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double W = 480, H = 320, x0 = 50, y0 = 20, pw = 400, ph = 260;
    auto X = [&](std::size_t t) { return x0 + (L > 1 ? pw * (double(t) - 1.0) / double(L - 1) : pw / 2); };
    auto Y = [&](double v) { return y0 + ph * (1.0 - (v - lo) / (hi - lo)); };
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) + "\">\n";
    s += "<text x=\"" + num(x0) + "\" y=\"14\" font-size=\"12\">" + title + "</text>\n";
    s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"#999\"/>\n";
    s += "<text x=\"4\" y=\"" + num(y0 + 10) + "\" font-size=\"10\">" + num(hi) + "</text>\n";
    s += "<text x=\"4\" y=\"" + num(y0 + ph) + "\" font-size=\"10\">" + num(lo) + "</text>\n";
    for (std::size_t ci = 0; ci < panel.size(); ++ci) {
        const char* colour = kPalette[ci % 8];
        std::string pts;
        for (const auto& p : panel[ci].points) {
            if (!p.mean) continue;
            pts += num(X(p.iteration)) + "," + num(Y(*p.mean)) + " ";
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" points=\"" + pts + "\"/>\n";
        s += "<text x=\"" + num(x0 + pw - 120) + "\" y=\"" + num(y0 + 14 + 12 * double(ci)) + "\" font-size=\"10\" fill=\"" +
             colour + "\">" + panel[ci].strategy + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace

std::string curve_csv(const std::vector<Curve>& panel) {
    std::string s = "strategy,iteration,mean,std,n\n";
    for (const auto& c : panel) {
        for (const auto& p : c.points) {
            s += csv_escape(c.strategy) + "," + std::to_string(p.iteration) + ",";
            if (p.mean) s += num(*p.mean) + "," + num(p.std);
            else s += ",";
            s += "," + std::to_string(p.n) + "\n";
        }
    }
    return s;
}

void emit_curves(const CurveSet& curves, const std::filesystem::path& dir, bool svg) {
    if (curves.accuracy.empty() && curves.objective.empty() && curves.coverage.empty()) {
        fail(ErrorKind::invalid_input, "no curves to emit");
    }
    ensure_dir(dir);
    const std::pair<const char*, const std::vector<Curve>*> panels[] = {{"accuracy", &curves.accuracy},
                                                                       {"coverage", &curves.coverage},
                                                                       {"objective", &curves.objective},
                                                                       {"thresholds", &curves.thresholds}};
    for (const auto& [name, panel] : panels) {
        write_file(dir / (std::string(name) + ".csv"), curve_csv(*panel));
        if (svg) write_file(dir / (std::string(name) + ".svg"), svg_panel(*panel, curves.max_iters, name));
    }
}

std::string errors_json(const std::vector<ErrorEntry>& errors) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : errors) {
        nlohmann::ordered_json o;
        o["stage"] = e.stage;
        o["strategy"] = e.strategy;
        o["fold"] = e.fold ? nlohmann::ordered_json(*e.fold) : nlohmann::ordered_json(nullptr);
        o["seed"] = e.seed ? nlohmann::ordered_json(*e.seed) : nlohmann::ordered_json(nullptr);
        o["instance"] = e.instance_id;
        o["kind"] = e.kind;
        o["message"] = e.message;
        arr.push_back(std::move(o));
    }
    nlohmann::ordered_json doc;
    doc["ok"] = errors.empty();
    doc["errors"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::string records_jsonl(const std::vector<RunRecord>& records) {
    std::string s;
    for (const auto& r : records) s += record_to_json(r) + "\n";
    return s;
}

ExperimentResult run_and_write(const ExperimentConfig& cfg) {
    ExperimentResult result = run_experiment(cfg);
    const auto& dir = cfg.output_dir;
    ensure_dir(dir);
    if (!result.curves.accuracy.empty()) emit_curves(result.curves, dir, cfg.svg);
    write_file(dir / "records.jsonl", records_jsonl(result.records));
    nlohmann::ordered_json index = nlohmann::ordered_json::object();
    if (!result.tables.empty()) {
        ensure_dir(dir / "tables");
        for (const auto& [key, table] : result.tables) {
            const std::string file = "tables/" + file_safe(key) + ".json";
            write_file(dir / file, table.to_json());
            index[key] = file;
        }
    }
    nlohmann::ordered_json meta;
    meta["max_iters"] = result.curves.max_iters;
    nlohmann::ordered_json order = nlohmann::ordered_json::array();
    for (const auto& c : result.curves.accuracy) order.push_back(c.strategy);
    meta["strategies"] = order;
    meta["tables"] = index;
    write_file(dir / "run.json", meta.dump(2) + "\n");
    if (result.mock_recording) write_file(dir / "mock_recording.json", *result.mock_recording);
    write_file(dir / "errors.json", errors_json(result.errors));
    return result;
}

ExperimentResult reload_output(const std::filesystem::path& dir) {
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) fail(ErrorKind::io, "cannot read " + p.string());
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    ExperimentResult result;
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read(dir / "run.json"));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("run.json: ") + e.what());
    }
    const auto L = meta.at("max_iters").get<std::size_t>();
    const auto order = meta.at("strategies").get<std::vector<std::string>>();
    for (const auto& [key, file] : meta.at("tables").items()) {
        result.tables.insert_or_assign(key, CalibrationTable::from_json(read(dir / file.get<std::string>())));
    }
    std::istringstream lines(read(dir / "records.jsonl"));
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) result.records.push_back(record_from_json(line));
    }
    result.curves = aggregate_curves(result.records, order, result.tables, L);
    return result;
}

}  // namespace cip::harness
