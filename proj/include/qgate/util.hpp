#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgate {

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

// Splits on any amount of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

// First balanced {...} block in the text, or nullopt. Tolerates prose and
// code fences around the JSON; string escapes inside the block are honored.
std::optional<std::string> extract_first_json_object(std::string_view text);

} // namespace qgate
