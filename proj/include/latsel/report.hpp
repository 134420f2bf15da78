#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latsel/sfm.hpp"

namespace latsel {

/// Shortest round-trip text for a double: 17 significant digits.
std::string format_real(double v);
/// Inverse of format_real; rejects trailing garbage.
double parse_real(const std::string& text);

/// One line of results.csv.
struct ReportRow {
    std::string experiment;
    std::string solver;
    std::size_t n = 0;
    std::optional<std::size_t> k;
    std::uint64_t seed = 0;
    double objective = 0.0;
    /// objective - exact objective, where an exact reference exists.
    std::optional<double> gap;
    double wall_seconds = 0.0;
    std::size_t iterations = 0;
    /// 0x-prefixed hex bitmask.
    std::string support = "0x0";

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

const std::string& results_header();
std::string serialize_row(const ReportRow& row);
ReportRow parse_row(const std::string& line);

void write_results_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_results_csv(std::istream& in);

/// iteration,objective,elapsed
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
/// index,value
void write_solution_csv(std::ostream& out, const Eigen::VectorXd& x);

}  // namespace latsel
