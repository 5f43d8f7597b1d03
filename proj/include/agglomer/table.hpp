#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace agglomer {

// Column-oriented table of numeric (NaN = missing) and string (empty =
// missing) columns; column order is preserved for output.
class DataTable {
 public:
  using Numeric = std::vector<double>;
  using Labels = std::vector<std::string>;

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool has(const std::string& name) const;
  bool is_numeric(const std::string& name) const;

  void add_numeric(std::string name, Numeric values);
  void add_labels(std::string name, Labels values);

  const Numeric& numeric(const std::string& name) const;
  // String view of any column; numeric values are formatted, NaN -> "".
  Labels labels(const std::string& name) const;

  // Rows selected by index, in the given order.
  DataTable select(const std::vector<std::size_t>& rows) const;

  void write_csv(std::ostream& out) const;
  // Columns whose every non-empty cell parses as a number become numeric.
  static DataTable read_csv(std::istream& in);
  static DataTable read_csv_file(const std::string& path);

 private:
  std::size_t index(const std::string& name) const;
  void check_length(std::size_t n);

  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::variant<Numeric, Labels>> data_;
};

}  // namespace agglomer
