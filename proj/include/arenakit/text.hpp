#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace arenakit::text {

bool is_space(char c);

std::string_view trim(std::string_view s);

// Trims and folds every whitespace run into one ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view content);

}  // namespace arenakit::text
