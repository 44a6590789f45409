#include "csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

namespace sign::cli {

namespace {

std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

std::vector<std::string> split_line(const std::string& line, const std::string& source, int number) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw InputError(where(source, number) + "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!have_header) {
      if (line.empty()) throw InputError(where(source, number) + "missing header row");
      for (auto& f : split_line(line, source, number)) table.header.push_back(trim(f));
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_line(line, source, number);
    if (fields.size() != table.header.size()) {
      throw InputError(where(source, number) + "expected " + std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(std::move(f));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(number);
  }
  if (!have_header) throw InputError(source + ": empty file, header row required");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in, path);
}

double parse_double(const std::string& field, const std::string& source, int line, const std::string& column) {
  if (field.empty()) throw InputError(where(source, line) + "missing value in column '" + column + "'");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InputError(where(source, line) + "column '" + column + "': '" + field + "' is not a finite number");
  }
  return v;
}

long parse_long(const std::string& field, const std::string& source, int line, const std::string& column) {
  if (field.empty()) throw InputError(where(source, line) + "missing value in column '" + column + "'");
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size() || errno == ERANGE) {
    throw InputError(where(source, line) + "column '" + column + "': '" + field + "' is not an integer");
  }
  return v;
}

LoadedData load_dataset(const std::string& path, const Schema& schema, bool require_outcome) {
  const CsvTable table = read_csv_file(path);
  auto need = [&](const std::string& name) {
    const int k = table.column(name);
    if (k < 0) throw InputError(path + ": schema column '" + name + "' not found in header");
    return static_cast<std::size_t>(k);
  };
  const int id_col = table.column("id");
  const int z_col = table.column(schema.response);
  if (require_outcome && z_col < 0) throw InputError(path + ": response column '" + schema.response + "' not found in header");
  std::vector<std::size_t> cont_cols;
  for (const auto& name : schema.continuous) cont_cols.push_back(need(name));
  std::vector<std::size_t> cat_cols;
  for (const auto& col : schema.categorical) cat_cols.push_back(need(col.name));

  LoadedData out{Dataset(schema), {}, z_col >= 0};
  std::vector<double> w(cont_cols.size());
  std::vector<int> u(cat_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int line = table.line_numbers[r];
    int z = 0;
    if (z_col >= 0) {
      const long v = parse_long(row[static_cast<std::size_t>(z_col)], path, line, schema.response);
      if (v != 0 && v != 1) throw InputError(where(path, line) + "response must be 0 or 1");
      z = static_cast<int>(v);
    }
    for (std::size_t j = 0; j < cont_cols.size(); ++j) {
      w[j] = parse_double(row[cont_cols[j]], path, line, schema.continuous[j]);
    }
    for (std::size_t j = 0; j < cat_cols.size(); ++j) {
      const auto& col = schema.categorical[j];
      const long code = parse_long(row[cat_cols[j]], path, line, col.name);
      if (code < 1 || code > col.levels) {
        throw InputError(where(path, line) + "column '" + col.name + "': unknown category " + std::to_string(code) +
                         " (expected 1.." + std::to_string(col.levels) + ")");
      }
      u[j] = static_cast<int>(code - 1);
    }
    out.data.push_back(z, w, u);
    out.ids.push_back(id_col >= 0 ? row[static_cast<std::size_t>(id_col)] : std::to_string(r));
  }
  return out;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const Schema& s = data.schema();
  out << "id," << s.response;
  for (const auto& name : s.continuous) out << ',' << name;
  for (const auto& col : s.categorical) out << ',' << col.name;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ',' << data.outcome(i);
    for (double w : data.continuous_row(i)) out << ',' << w;
    for (int u : data.categorical_row(i)) out << ',' << (u + 1);
    out << '\n';
  }
}

}  // namespace sign::cli
