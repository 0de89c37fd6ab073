#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace textcoder::text {

// Lowercases ASCII and the precomposed Latin-1 / Latin Extended-A letters
// (covers Swedish å ä ö and most western European text). Other bytes pass
// through untouched.
std::string to_lower(std::string_view s);

// ASCII-only lowercase; used for label matching where ids are ASCII.
std::string ascii_lower(std::string_view s);

// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t codepoint_count(std::string_view s);

std::string_view trim(std::string_view s);

// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_ws(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

}  // namespace textcoder::text
