#include "moprox/trace_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace moprox {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace_csv(const SolverTrace& trace, std::ostream& out) {
    const Eigen::Index m = trace.F_x0.size();
    const bool mfista = is_mfista(trace.algorithm);
    out << "k,stationarity,t,accepted";
    for (Eigen::Index i = 1; i <= m; ++i) out << ",F_" << i;
    if (mfista) {
        for (Eigen::Index i = 1; i <= m; ++i) out << ",Fz_" << i;
    }
    out << '\n';
    for (const auto& r : trace.records) {
        out << r.k << ',' << format_double(r.stationarity) << ',' << format_double(r.t) << ','
            << (r.accepted ? 1 : 0);
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(r.F_x[i]);
        if (mfista) {
            for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(r.F_z[i]);
        }
        out << '\n';
    }
}

std::string trace_csv(const SolverTrace& trace) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    return out.str();
}

namespace {

// JSON has no infinities; they are written as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json vec(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

double to_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    throw std::invalid_argument("expected a number");
}

Vector to_vector(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(j[i]);
    return v;
}

}  // namespace

RunManifest make_manifest(const SolverTrace& trace, std::string problem, int start_index, double epsilon,
                          bool record_timing, std::string trace_file) {
    RunManifest m;
    m.algorithm = trace.algorithm;
    m.problem = std::move(problem);
    m.start_index = start_index;
    m.status = trace.status;
    m.iterations = trace.iterations();
    m.objectives = static_cast<int>(trace.F_x0.size());
    m.epsilon = epsilon;
    m.ell_initial = trace.ell_initial;
    m.ell_final = trace.ell_final;
    m.safeguard_triggers = trace.safeguard_triggers;
    m.wall_ms = record_timing ? 1e3 * trace.wall_seconds : 0.0;
    m.terminal_last = !trace.records.empty() && trace.records.back().terminal;
    m.x0 = trace.x0;
    m.F_x0 = trace.F_x0;
    m.final_x = trace.final_x;
    m.final_F = trace.final_F;
    m.trace_file = std::move(trace_file);
    return m;
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["algorithm"] = std::string(to_string(m.algorithm));
    j["problem"] = m.problem;
    j["start_index"] = m.start_index;
    j["status"] = std::string(to_string(m.status));
    j["iterations"] = m.iterations;
    j["objectives"] = m.objectives;
    j["epsilon"] = number(m.epsilon);
    j["ell_initial"] = number(m.ell_initial);
    j["ell_final"] = number(m.ell_final);
    j["safeguard_triggers"] = m.safeguard_triggers;
    j["wall_ms"] = number(m.wall_ms);
    j["terminal_last"] = m.terminal_last;
    j["x0"] = vec(m.x0);
    j["F_x0"] = vec(m.F_x0);
    j["final_x"] = vec(m.final_x);
    j["final_F"] = vec(m.final_F);
    j["trace_file"] = m.trace_file;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what(), e.byte);
    }
    RunManifest m;
    try {
        m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
        m.problem = j.at("problem").get<std::string>();
        m.start_index = j.at("start_index").get<int>();
        m.status = parse_status(j.at("status").get<std::string>());
        m.iterations = j.at("iterations").get<int>();
        m.objectives = j.at("objectives").get<int>();
        m.epsilon = to_double(j.at("epsilon"));
        m.ell_initial = to_double(j.at("ell_initial"));
        m.ell_final = to_double(j.at("ell_final"));
        m.safeguard_triggers = j.value("safeguard_triggers", 0);
        m.wall_ms = to_double(j.value("wall_ms", json(0.0)));
        m.terminal_last = j.at("terminal_last").get<bool>();
        m.x0 = to_vector(j.at("x0"));
        m.F_x0 = to_vector(j.at("F_x0"));
        m.final_x = to_vector(j.at("final_x"));
        m.final_F = to_vector(j.at("final_F"));
        m.trace_file = j.at("trace_file").get<std::string>();
    } catch (const std::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0);
    }
    if (m.F_x0.size() != m.objectives || m.final_F.size() != m.objectives) {
        throw ParseError("manifest: objective count does not match F vectors", 0);
    }
    return m;
}

SolverTrace read_trace(std::string_view csv, const RunManifest& manifest) {
    SolverTrace trace;
    trace.algorithm = manifest.algorithm;
    trace.x0 = manifest.x0;
    trace.F_x0 = manifest.F_x0;
    trace.final_x = manifest.final_x;
    trace.final_F = manifest.final_F;
    trace.status = manifest.status;
    trace.ell_initial = manifest.ell_initial;
    trace.ell_final = manifest.ell_final;
    trace.safeguard_triggers = manifest.safeguard_triggers;

    const int m = manifest.objectives;
    const bool mfista = is_mfista(manifest.algorithm);
    const std::size_t columns = 4 + static_cast<std::size_t>(m) * (mfista ? 2 : 1);

    std::size_t pos = 0;
    bool header = true;
    while (pos < csv.size()) {
        std::size_t end = csv.find('\n', pos);
        if (end == std::string_view::npos) end = csv.size();
        const std::string_view line = csv.substr(pos, end - pos);
        const std::size_t line_start = pos;
        pos = end + 1;
        if (line.empty()) continue;

        std::vector<std::string> cells;
        std::size_t c = 0;
        for (;;) {
            const std::size_t comma = line.find(',', c);
            cells.emplace_back(line.substr(c, comma == std::string_view::npos ? std::string_view::npos : comma - c));
            if (comma == std::string_view::npos) break;
            c = comma + 1;
        }
        if (cells.size() != columns) {
            throw ParseError("trace: expected " + std::to_string(columns) + " columns, found " +
                                 std::to_string(cells.size()),
                             line_start);
        }
        if (header) {
            if (cells[0] != "k" || cells[3] != "accepted") throw ParseError("trace: unexpected header", line_start);
            header = false;
            continue;
        }
        IterationRecord r;
        try {
            r.k = std::stoi(cells[0]);
            r.stationarity = std::stod(cells[1]);
            r.t = std::stod(cells[2]);
            r.accepted = cells[3] == "1";
            r.F_x.resize(m);
            r.F_z.resize(m);
            for (int i = 0; i < m; ++i) r.F_x[i] = std::stod(cells[4 + i]);
            for (int i = 0; i < m; ++i) r.F_z[i] = mfista ? std::stod(cells[4 + m + i]) : r.F_x[i];
        } catch (const std::exception&) {
            throw ParseError("trace: malformed number", line_start);
        }
        r.ell = manifest.ell_final;
        trace.records.push_back(std::move(r));
    }
    if (header) throw ParseError("trace: missing header", 0);
    if (manifest.terminal_last && !trace.records.empty()) trace.records.back().terminal = true;
    return trace;
}

std::string render_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label) {
    constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            x0 = std::min(x0, s.xs[i]);
            x1 = std::max(x1, s.xs[i]);
            y0 = std::min(y0, s.ys[i]);
            y1 = std::max(y1, s.ys[i]);
        }
    }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream svg;
    char buf[96];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        std::snprintf(buf, sizeof buf, "%.4g", xv);
        svg << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", yv);
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
        svg << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
            << "\" stroke=\"#ddd\"/>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    svg << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % std::size(colors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < series[s].xs.size() && i < series[s].ys.size(); ++i) {
            if (!std::isfinite(series[s].xs[i]) || !std::isfinite(series[s].ys[i])) continue;
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(series[s].xs[i]), py(series[s].ys[i]));
            svg << buf;
            first = false;
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << W - right + 12 << "\" x2=\"" << W - right + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << W - right + 42 << "\" y=\"" << ly + 4 << "\">" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace moprox
