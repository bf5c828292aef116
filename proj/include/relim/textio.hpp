#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relim {

// Shortest decimal form that parses back to the identical double
// (std::to_chars round-trip guarantee). All file formats use this so that
// write -> read -> write is byte-identical.
std::string format_double(double v);

// Strict full-string parses; throw InputError with `what` context on failure.
double parse_double(std::string_view s, std::string_view what = "number");
long long parse_int(std::string_view s, std::string_view what = "integer");

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace relim
