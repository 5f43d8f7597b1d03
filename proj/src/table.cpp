#include "agglomer/table.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "agglomer/csv.hpp"
#include "agglomer/error.hpp"

namespace agglomer {

bool DataTable::has(const std::string& name) const {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t DataTable::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw validation_error("UnknownColumn", "column '" + name + "' not found");
}

bool DataTable::is_numeric(const std::string& name) const {
  return std::holds_alternative<Numeric>(data_[index(name)]);
}

void DataTable::check_length(std::size_t n) {
  if (names_.empty()) {
    rows_ = n;
  } else if (n != rows_) {
    throw validation_error("ShapeMismatch", "column length " + std::to_string(n) + " differs from table rows " +
                                                std::to_string(rows_));
  }
}

void DataTable::add_numeric(std::string name, Numeric values) {
  if (has(name)) throw validation_error("DuplicateColumn", "column '" + name + "' already exists");
  check_length(values.size());
  names_.push_back(std::move(name));
  data_.emplace_back(std::move(values));
}

void DataTable::add_labels(std::string name, Labels values) {
  if (has(name)) throw validation_error("DuplicateColumn", "column '" + name + "' already exists");
  check_length(values.size());
  names_.push_back(std::move(name));
  data_.emplace_back(std::move(values));
}

const DataTable::Numeric& DataTable::numeric(const std::string& name) const {
  const auto& col = data_[index(name)];
  if (!std::holds_alternative<Numeric>(col)) throw validation_error("NotNumeric", "column '" + name + "' is not numeric");
  return std::get<Numeric>(col);
}

DataTable::Labels DataTable::labels(const std::string& name) const {
  const auto& col = data_[index(name)];
  if (const auto* l = std::get_if<Labels>(&col)) return *l;
  const auto& v = std::get<Numeric>(col);
  Labels out;
  out.reserve(v.size());
  for (double x : v) out.push_back(csv::format_double(x));
  return out;
}

DataTable DataTable::select(const std::vector<std::size_t>& rows) const {
  DataTable out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::visit(
        [&](const auto& col) {
          std::decay_t<decltype(col)> picked;
          picked.reserve(rows.size());
          for (auto r : rows) picked.push_back(col.at(r));
          out.names_.push_back(names_[c]);
          out.data_.emplace_back(std::move(picked));
        },
        data_[c]);
  }
  out.rows_ = rows.size();
  return out;
}

void DataTable::write_csv(std::ostream& out) const {
  csv::write_row(out, names_);
  std::vector<std::string> fields(names_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (const auto* v = std::get_if<Numeric>(&data_[c])) {
        fields[c] = csv::format_double((*v)[r]);
      } else {
        fields[c] = std::get<Labels>(data_[c])[r];
      }
    }
    csv::write_row(out, fields);
  }
}

namespace {

bool parses_as_number(const std::string& s) {
  if (s.empty() || s == "NA") return true;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace

DataTable DataTable::read_csv(std::istream& in) {
  const auto table = csv::read(in);
  DataTable out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    bool numeric = true;
    for (const auto& row : table.rows) {
      if (!parses_as_number(row[c])) {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      Numeric values;
      values.reserve(table.rows.size());
      for (const auto& row : table.rows) values.push_back(csv::parse_double(row[c]));
      out.add_numeric(table.header[c], std::move(values));
    } else {
      Labels values;
      values.reserve(table.rows.size());
      for (const auto& row : table.rows) values.push_back(row[c]);
      out.add_labels(table.header[c], std::move(values));
    }
  }
  if (table.header.empty()) out.rows_ = 0;
  return out;
}

DataTable DataTable::read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("FileNotFound", "cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace agglomer
