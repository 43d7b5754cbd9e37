#pragma once

#include <filesystem>
#include <string>

namespace irpdfl {

// Whole-file read; throws FormatError naming the path when unreadable.
std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file. Throws FormatError on failure.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// Shortest decimal that round-trips the double exactly.
std::string format_double(double value);

}  // namespace irpdfl
