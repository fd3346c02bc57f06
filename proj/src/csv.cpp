#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lattice/errors.hpp"
#include "lattice/experiments.hpp"

namespace lattice {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw DomainError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (first) {
      table.header = fields;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& s : fields) {
      double v = 0.0;
      if (s == "nan" || s == "-nan") {
        v = std::numeric_limits<double>::quiet_NaN();
      } else if (s == "inf" || s == "-inf") {
        v = s[0] == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
      } else {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw DomainError("bad CSV number '" + s + "'");
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) throw DomainError("CSV row width differs from header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  const std::string text = format_csv(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

CsvTable constants_table(const DerivedConstants& c) {
  return {{"mu", "theta1", "theta2", "delta1", "delta2", "R0_sq", "R", "chi0", "C0", "L0", "C1"},
          {{c.mu, c.theta1, c.theta2, c.delta1, c.delta2, c.R0_sq, c.R, c.chi0, c.C0, c.L0, c.C1}}};
}

}  // namespace lattice
