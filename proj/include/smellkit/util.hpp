#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smellkit::util {

// SHA-256 hex digest.
std::string sha256_hex(std::string_view data);

// Number of Unicode scalars in a UTF-8 byte string (continuation bytes are
// not counted). Assumes the input already passed utf8_valid.
std::size_t utf8_length(std::string_view bytes);

bool utf8_valid(std::string_view bytes);

// "fixed out of total" as a percentage with one decimal, rounded half-up.
// Returns "n/a" when total == 0.
std::string percent_one_decimal(long long numerator, long long denominator);

// Exact permille (tenths of a percent) of numerator/denominator, half-up.
long long percent_permille(long long numerator, long long denominator);

// Strips the longest common leading whitespace of all non-blank lines,
// like textwrap.dedent.
std::string dedent(std::string_view text);

std::vector<std::string_view> split_lines(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::string url_encode(std::string_view s);
std::optional<std::string> base64_decode(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

std::string trim(std::string_view s);

}  // namespace smellkit::util
