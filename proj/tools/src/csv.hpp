#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sign/dataset.hpp"

namespace sign::cli {

/// Bad input file contents (as opposed to bad command-line usage).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  int column(const std::string& name) const;  // -1 if absent
};

/// Comma-separated with a header row; double-quoted fields may contain commas.
/// Every row must have exactly as many fields as the header.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

double parse_double(const std::string& field, const std::string& source, int line, const std::string& column);
long parse_long(const std::string& field, const std::string& source, int line, const std::string& column);

struct LoadedData {
  Dataset data;
  std::vector<std::string> ids;  // from an "id" column, else the 0-based row index
  bool has_outcome = false;
};

/// Reads rows matching `schema`. Categorical cells hold 1-based codes.
/// With `require_outcome` false a missing response column is allowed and
/// outcomes are stored as 0.
LoadedData load_dataset(const std::string& path, const Schema& schema, bool require_outcome);

void write_dataset(std::ostream& out, const Dataset& data);

}  // namespace sign::cli
