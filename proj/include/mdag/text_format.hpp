#ifndef MDAG_TEXT_FORMAT_HPP
#define MDAG_TEXT_FORMAT_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace mdag {

std::string trim(std::string_view s);

/// 17 significant digits, so parse_double(format_double(x)) == x bit for bit.
/// Infinities print as "inf"/"-inf".
std::string format_double(double x);

/// Shortest text that parses back to exactly x.
std::string format_shortest(double x);

/// Parses the whole of `text` (inf/-inf accepted). Returns false on any leftover characters.
bool parse_double(std::string_view text, double& out);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace mdag

#endif  // MDAG_TEXT_FORMAT_HPP
