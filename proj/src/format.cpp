#include "eiprobe/format.hpp"

#include <charconv>
#include <cmath>

namespace eiprobe {

std::string schema_comment(std::string_view kind) {
  return "# schema=eiprobe." + std::string(kind) + " version=" + std::to_string(kSchemaVersion);
}

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

} // namespace eiprobe
