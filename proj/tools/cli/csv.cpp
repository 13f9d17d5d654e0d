#include "csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "dlambert/errors.hpp"

namespace dlambert::cli {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_short(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string> kTrajectoryColumns{"t", "x1", "x2", "xdot1", "xdot2", "r", "theta_lift", "c", "h", "p"};

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) out << (i ? "," : "") << kTrajectoryColumns[i];
  out << '\n';
  for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
    const State& s = it->state;
    const Diagnostics& d = it->diag;
    const double row[] = {s.t, s.x.x, s.x.y, s.xdot.x, s.xdot.y, d.r, d.theta, d.c, d.h, d.p};
    for (std::size_t i = 0; i < std::size(row); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV has no column \"" + name + "\"");
}

CsvTable read_numeric_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV is empty");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) table.header.push_back(cell);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ConfigError("CSV line " + std::to_string(line_no) + ": not a number: \"" + cell + "\"");
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                        " fields");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace dlambert::cli
