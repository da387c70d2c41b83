#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "growth/mc_oracle.hpp"
#include "growth/policy.hpp"

namespace growth {

inline constexpr const char* kTableSchema = "growth-table/1";
inline constexpr const char* kDistributionSchema = "growth-distribution/1";
inline constexpr const char* kTraceSchema = "growth-trace/1";
inline constexpr const char* kOracleSchema = "growth-oracle/1";

struct TableRow {
    std::string label;
    EquilibriumState state;
    double welfare_index = 100.0;
    double welfare_index_net = 100.0;
    double s_inc = 0.0;
};

// The 14 result columns: entry rate, x, shares and thresholds per type,
// R&D labor ratio, tau, g, welfare.
std::vector<std::string> table_columns();
std::vector<double> table_values(const TableRow& row);

// Percent with two decimals (welfare as an index), config hash in a header
// comment. The raw file carries the same rows at full precision, plus the
// net welfare index and the subsidy rate.
void write_table(const std::string& path, const std::vector<TableRow>& rows, const std::string& hash);
void write_table_raw(const std::string& path, const std::vector<TableRow>& rows,
                     const std::string& hash);

// Grid, overall CDF and the conditional CDF per type.
void write_distribution(const std::string& path, const DistributionSet& dist, const std::string& hash);

// gnuplot script for a distribution CSV; regions below each threshold are shaded.
void write_plot_script(const std::string& path, const std::string& csv_name,
                       const PerType& q_min, const std::string& title);

void write_planner_trace(const std::string& path, const std::vector<TracePoint>& trace,
                         const std::string& hash);

void write_oracle(const std::string& path, const PanelStats& stats, const OracleReport& report,
                  const DistributionSet& dist, const std::string& hash);

// Manifest of `files` (relative to `dir`) with a content hash per file.
// Timings are wall-clock seconds and the only nondeterministic field.
void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    const std::string& hash, const std::string& command, std::uint64_t seed,
                    const std::vector<std::pair<std::string, double>>& timings);

void write_error_record(const std::string& path, const std::string& command,
                        const std::string& message, const std::string& key, const std::string& hash);

// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

}  // namespace growth
