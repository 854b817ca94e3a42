#pragma once

#include <string>
#include <vector>

#include "clocksync/experiments.hpp"
#include "clocksync/metrics.hpp"
#include "clocksync/trajectory.hpp"

namespace clocksync {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Shortest round-trip decimal for a double, independent of the C locale.
// Non-finite values are written as nan, inf and -inf.
std::string format_number(double value);

// Throws ConfigError on an empty table or ragged rows (no file is created),
// IoError when the file cannot be written.
void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);

// One polyline per requested column against the first column, each curve in
// its own panel with an independent vertical scale.
void write_svg(const std::string& path, const Table& table, const std::vector<std::string>& columns,
               const std::string& title);

Table sweep_table(const std::vector<SweepRow>& rows);
Table transient_table(const TransientResult& result);
Table trajectory_table(const Trajectory& traj);

}  // namespace clocksync
