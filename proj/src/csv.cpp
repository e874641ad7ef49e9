#include "gdfactor/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "gdfactor/error.hpp"

namespace gdfactor {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InvalidArgument("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

CsvTable::CsvTable(std::vector<CsvColumn> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidArgument("CsvTable: no columns");
}

void CsvTable::add_meta(const std::string& line) { meta_.push_back(line); }

void CsvTable::add_standard_meta(std::string_view command, std::uint64_t master_seed,
                                 const std::vector<std::string>& config_echo) {
  add_meta("gdfactor " + std::string(kVersion) + " " + std::string(command));
  add_meta("master_seed = " + std::to_string(master_seed));
  for (const auto& line : config_echo) add_meta("config: " + line);
}

CsvTable::Row& CsvTable::Row::add(double v) {
  cells_.push_back(format_double(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::add(const std::string& v) {
  if (v.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : v) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    cells_.push_back(quoted + "\"");
  } else {
    cells_.push_back(v);
  }
  return *this;
}

void CsvTable::push(Row row) {
  if (row.cells_.size() != columns_.size()) {
    throw InvalidArgument("CsvTable: row has " + std::to_string(row.cells_.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row.cells_));
}

std::string CsvTable::str() const {
  std::string out;
  for (const auto& m : meta_) out += "# " + m + "\n";
  for (const auto& c : columns_) out += "# column " + c.name + ": " + c.doc + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i].name;
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text_file(path, str()); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gdfactor
