#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace skincure::csv {

using Row = std::vector<std::string>;

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled quotes.
Row split_line(std::string_view line);

/// Reads all non-blank records; the first row is the header. A UTF-8 BOM is
/// skipped. Throws Error(FileNotFound) if the file cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join(const Row& row);

}  // namespace skincure::csv
