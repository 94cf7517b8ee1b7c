#pragma once

#include <string>
#include <string_view>

namespace weakbench {

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

/// Collapses runs of whitespace to single spaces and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Casefolded (ASCII lowercase) and whitespace-collapsed form, used as a
/// dedupe key for near-identical texts.
std::string dedupe_key(std::string_view text);

/// Problem id: digest of the whitespace-normalized statement, so the same
/// statement hashes equal across processes and re-loads.
std::string problem_id(std::string_view statement);

}  // namespace weakbench
