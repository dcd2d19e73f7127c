#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace eiprobe {

// Version of every CSV/JSONL layout written by this library. Bump when a
// column or field changes meaning.
inline constexpr int kSchemaVersion = 1;

// "# schema=eiprobe.<kind> version=<kSchemaVersion>"
std::string schema_comment(std::string_view kind);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// format_double, or an empty field when absent.
std::string format_optional(const std::optional<double>& v);

} // namespace eiprobe
