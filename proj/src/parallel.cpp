#include "eiprobe/parallel.hpp"

#include <cstdlib>
#include <string>

#include "eiprobe/errors.hpp"

namespace eiprobe {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("EI_PROBE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError(std::string("EI_PROBE_THREADS is not a non-negative integer: '") + env +
                        "'");
    }
    if (v > 0) {
      return static_cast<std::size_t>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

} // namespace eiprobe
