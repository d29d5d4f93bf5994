#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace structsql::text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);

/// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Splits UTF-8 into code points. Invalid bytes are returned one per entry.
std::vector<std::string> utf8_codepoints(std::string_view s);

/// True for code points in the common CJK ideograph blocks.
bool is_cjk(std::string_view codepoint);

}  // namespace structsql::text
