#ifndef NATDISC_TEXT_UTIL_H_
#define NATDISC_TEXT_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace natdisc {

// ASCII-only case folding; bytes >= 0x80 pass through untouched.
inline char AsciiLower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}
std::string AsciiLowerCopy(std::string_view s);

inline bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view Trim(std::string_view s);

// Whitespace-delimited tokens (views into |text|).
std::vector<std::string_view> SplitWhitespace(std::string_view text);

std::vector<std::string> SplitChar(std::string_view s, char sep);

// Whole file as bytes. Throws InputError if unreadable.
std::string ReadFile(const std::filesystem::path& path);

// Lines without their terminators ("\n" or "\r\n").
std::vector<std::string> ReadLines(const std::filesystem::path& path);

void WriteFile(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256 of |data|.
std::string Sha256Hex(std::string_view data);

// Minimal RFC 4180 CSV support: quoted fields may contain separators,
// doubled quotes and newlines.
using CsvRow = std::vector<std::string>;
std::vector<CsvRow> ParseCsv(std::string_view content);
std::string CsvEscape(std::string_view field);
std::string CsvLine(const std::vector<std::string>& fields);

// A CSV file with a header row; cells are addressed by column name.
class CsvTable {
 public:
  static CsvTable Parse(std::string_view content);
  static CsvTable Load(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  size_t rows() const { return rows_.size(); }
  bool has_column(std::string_view name) const;
  // Throws InputError if the column does not exist.
  size_t column(std::string_view name) const;
  const std::string& at(size_t row, size_t col) const {
    return rows_[row][col];
  }

 private:
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

}  // namespace natdisc

#endif  // NATDISC_TEXT_UTIL_H_
