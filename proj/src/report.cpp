#include "latsel/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "latsel/lattice.hpp"

namespace latsel {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw InvalidArgument("parse_real: '" + text + "' is not a number");
    return v;
}

namespace {

template <class T>
T parse_unsigned(const std::string& text, const char* field) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw InvalidArgument(std::string("results.csv: bad ") + field + " '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

const std::string& results_header() {
    static const std::string header = "experiment,solver,n,k,seed,objective,gap,wall_seconds,iterations,support";
    return header;
}

std::string serialize_row(const ReportRow& r) {
    std::ostringstream os;
    os << r.experiment << ',' << r.solver << ',' << r.n << ',' << (r.k ? std::to_string(*r.k) : "") << ',' << r.seed
       << ',' << format_real(r.objective) << ',' << (r.gap ? format_real(*r.gap) : "") << ','
       << format_real(r.wall_seconds) << ',' << r.iterations << ',' << r.support;
    return os.str();
}

ReportRow parse_row(const std::string& line) {
    auto f = split(line);
    if (f.size() != 10) throw InvalidArgument("results.csv: expected 10 fields, got " + std::to_string(f.size()));
    ReportRow r;
    r.experiment = f[0];
    r.solver = f[1];
    r.n = parse_unsigned<std::size_t>(f[2], "n");
    if (!f[3].empty()) r.k = parse_unsigned<std::size_t>(f[3], "k");
    r.seed = parse_unsigned<std::uint64_t>(f[4], "seed");
    r.objective = parse_real(f[5]);
    if (!f[6].empty()) r.gap = parse_real(f[6]);
    r.wall_seconds = parse_real(f[7]);
    r.iterations = parse_unsigned<std::size_t>(f[8], "iterations");
    if (f[9].rfind("0x", 0) != 0) throw InvalidArgument("results.csv: support must be 0x-prefixed hex");
    r.support = f[9];
    return r;
}

void write_results_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << results_header() << '\n';
    for (const auto& r : rows) out << serialize_row(r) << '\n';
}

std::vector<ReportRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || split(line).size() != 10 || line.rfind(results_header(), 0) != 0)
        throw InvalidArgument("results.csv: missing or wrong header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(parse_row(line));
    }
    return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "iteration,objective,elapsed\n";
    for (const auto& t : trace) out << t.iteration << ',' << format_real(t.objective) << ',' << format_real(t.elapsed) << '\n';
}

void write_solution_csv(std::ostream& out, const Eigen::VectorXd& x) {
    out << "index,value\n";
    for (Eigen::Index i = 0; i < x.size(); ++i) out << i << ',' << format_real(x[i]) << '\n';
}

}  // namespace latsel
