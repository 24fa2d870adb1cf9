#include "csv.hpp"

#include <fstream>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "joinsim/errors.hpp"

namespace joinsim::csv {

std::vector<std::string> split_line(std::string_view line) {
  using Separator = boost::escaped_list_separator<char>;
  const std::string text(line);
  std::vector<std::string> fields;
  try {
    boost::tokenizer<Separator> tokens(text, Separator('\\', ',', '"'));
    for (const auto& token : tokens) fields.push_back(token);
  } catch (const boost::escaped_list_error& e) {
    throw FormatError(std::string("malformed CSV line: ") + e.what());
  }
  return fields;
}

std::string join_fields(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(',');
    const std::string& field = fields[i];
    const bool quote = field.find_first_of(",\"\\") != std::string::npos;
    if (!quote) {
      out += field;
      continue;
    }
    out.push_back('"');
    for (const char c : field) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace joinsim::csv
