#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dlambert/integrator.hpp"

namespace dlambert::cli {

// %.17g-style text (round-trips exactly), independent of the global locale.
std::string format_double(double v);
// Shortest round-trip text, for messages.
std::string format_short(double v);

extern const std::vector<std::string> kTrajectoryColumns;

// One row per sample, ascending in t (from -T up to 0).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

// Numeric CSV with a header line. Throws ConfigError on malformed input.
CsvTable read_numeric_csv(std::istream& in);

}  // namespace dlambert::cli
