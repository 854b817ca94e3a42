#include "clocksync/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "clocksync/errors.hpp"

namespace clocksync {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw IoError("csv: cannot parse number '" + text + "'");
  return value;
}

void check_table(const Table& table) {
  if (table.header.empty() || table.rows.empty()) throw ConfigError("output: no data to write");
  for (const auto& row : table.rows)
    if (row.size() != table.header.size()) throw ConfigError("output: ragged table");
}

std::size_t column_index(const Table& table, const std::string& name) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw ConfigError("output: no column named '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_csv(const std::string& path, const Table& table) {
  check_table(table);
  std::ofstream out = open_for_write(path);
  for (std::size_t k = 0; k < table.header.size(); ++k)
    out << (k ? "," : "") << table.header[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv '" + path + "' is empty");
  table.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& field : split(line, ',')) row.push_back(parse_number(field));
    if (row.size() != table.header.size()) throw IoError("csv '" + path + "' has a ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_svg(const std::string& path, const Table& table, const std::vector<std::string>& columns,
               const std::string& title) {
  check_table(table);
  if (columns.empty()) throw ConfigError("svg: no columns requested");
  std::vector<std::size_t> index;
  for (const std::string& c : columns) index.push_back(column_index(table, c));

  constexpr double width = 640.0, panel = 160.0, margin = 40.0;
  const double height = margin + panel * static_cast<double>(columns.size()) + 20.0;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& row : table.rows)
    if (std::isfinite(row[0])) {
      xmin = std::min(xmin, row[0]);
      xmax = std::max(xmax, row[0]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;

  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<title>" << title << "</title>\n<text x=\"" << margin << "\" y=\"20\">" << title
      << "</text>\n";
  for (std::size_t c = 0; c < index.size(); ++c) {
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& row : table.rows)
      if (std::isfinite(row[index[c]])) {
        ymin = std::min(ymin, row[index[c]]);
        ymax = std::max(ymax, row[index[c]]);
      }
    if (!(ymax > ymin)) {
      ymin = std::isfinite(ymin) ? ymin - 0.5 : 0.0;
      ymax = ymin + 1.0;
    }
    const double top = margin + panel * static_cast<double>(c);
    const double bottom = top + panel - 30.0;
    svg << "<text x=\"" << margin << "\" y=\"" << top + 10.0 << "\">" << columns[c] << " ["
        << format_number(ymin) << ", " << format_number(ymax) << "]</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (const auto& row : table.rows) {
      if (!std::isfinite(row[0]) || !std::isfinite(row[index[c]])) continue;
      const double x = margin + (width - 2 * margin) * (row[0] - xmin) / (xmax - xmin);
      const double y = bottom - (bottom - top - 15.0) * (row[index[c]] - ymin) / (ymax - ymin);
      svg << x << ',' << y << ' ';
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out = open_for_write(path);
  out << svg.str();
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t;
  t.header = {"g_over_kappa", "C",     "D",     "N1",    "N2",   "gamma_plus", "gamma_minus",
              "ratio",        "mu_b1", "mu_b2", "mu_a",  "pi_s", "analytic_C"};
  for (const SweepRow& r : rows)
    t.rows.push_back({r.g_over_kappa, r.C, r.D, r.N1, r.N2, r.gamma_plus, r.gamma_minus, r.ratio,
                      r.mu_b1, r.mu_b2, r.mu_a, r.Pi_s, r.analytic_C});
  return t;
}

Table transient_table(const TransientResult& result) {
  Table t;
  t.header = {"t", "R", "mu_b1", "mu_b2", "mu_a"};
  for (Eigen::Index k = 0; k < result.times.size(); ++k)
    t.rows.push_back(
        {result.times(k), result.R(k), result.mu_b1_t(k), result.mu_b2_t(k), result.mu_a_t(k)});
  return t;
}

Table trajectory_table(const Trajectory& traj) {
  Table t;
  t.header = {"t", "re_b1", "im_b1", "re_b2", "im_b2"};
  t.rows.reserve(static_cast<std::size_t>(traj.size()));
  for (Eigen::Index k = 0; k < traj.size(); ++k)
    t.rows.push_back({traj.times(k), traj.b1(k).real(), traj.b1(k).imag(), traj.b2(k).real(),
                      traj.b2(k).imag()});
  return t;
}

}  // namespace clocksync
