#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "eiprobe/harness.hpp"

namespace eiprobe {

inline constexpr const char* kRunSchema = "eiprobe.run";

// Line-delimited JSON: a header object {"schema","version","spec"} followed
// by one object per checkpoint. Absent joint-EI fields are written as null.
void write_run_jsonl(std::ostream& out, const RunRecord& record);
void save_run_jsonl(const std::filesystem::path& path, const RunRecord& record);

// Throws UnsupportedVersionError on a schema or version mismatch and
// ParseError (offset = line number) on malformed lines.
RunRecord read_run_jsonl(std::istream& in);
RunRecord load_run_jsonl(const std::filesystem::path& path);

// One row per (checkpoint, layer).
void write_run_csv(std::ostream& out, const RunRecord& record);

// CSV of EIResults, one row per layer, labelled from first_layer.
void write_ei_csv(std::ostream& out, const std::vector<EIResult>& layers,
                  std::size_t first_layer = 0);

} // namespace eiprobe
