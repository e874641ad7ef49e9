#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdfactor {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct CsvColumn {
  std::string name;
  std::string doc;
};

/// In-memory CSV document: '#' metadata lines, one '#' line per column,
/// a header row, then data rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<CsvColumn> columns);

  void add_meta(const std::string& line);
  /// Metadata block shared by every experiment file.
  void add_standard_meta(std::string_view command, std::uint64_t master_seed,
                         const std::vector<std::string>& config_echo);

  class Row {
   public:
    Row& add(double v);
    template <std::integral T>
    Row& add(T v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& add(const std::string& v);
    Row& add(const char* v) { return add(std::string(v)); }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  /// Throws InvalidArgument when the cell count differs from the header.
  void push(Row row);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;
  /// Writes str() to `path`; throws IoError.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<CsvColumn> columns_;
  std::vector<std::string> meta_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes `content` to `path`, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gdfactor
