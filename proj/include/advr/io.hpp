#ifndef ADVR_IO_HPP
#define ADVR_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advr {

/// Whole-file read; ErrorKind::Io when the file cannot be opened.
std::string read_file(const std::filesystem::path &path);

/// Writes to a sibling temp file then renames over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);
/// Empty string for a missing value.
std::string format_number(const std::optional<double> &v);

/// Minimal CSV builder: fixed header, comma-separated rows, '\n' line ends.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace advr

#endif  // ADVR_IO_HPP
