#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace missionscope::io {

// Whole-file read; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it into place, creating parent
// directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

// Appends `line` plus '\n' and fsyncs before returning.
void append_line_durable(const std::filesystem::path& path, std::string_view line);

} // namespace missionscope::io
