#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hte {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // npos when absent
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// RFC-4180-style reader: quoted fields, doubled quotes, CRLF or LF.
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_escape(const std::string& field);

// Atomic write: temp file in the target directory, then rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace hte
