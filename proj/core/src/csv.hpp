#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace joinsim::csv {

/// Splits one line. Fields may be double-quoted; inside quotes a backslash
/// escapes the next character.
std::vector<std::string> split_line(std::string_view line);

/// Inverse of split_line: quotes fields that need it.
std::string join_fields(const std::vector<std::string>& fields);

/// Reads every line of a text file, stripping a trailing '\r'. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Whole-file read/write helpers; throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace joinsim::csv
