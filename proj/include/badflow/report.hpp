// Deterministic artifact plumbing: round-trip-exact number formatting, CSV
// with a commented config header, and small file helpers.  Everything the CLI
// writes goes through here so that identical runs produce identical bytes.
#pragma once

#include <string>
#include <vector>

namespace badflow {

// Round-trip-exact decimal form of a double (printf %.17g).
std::string fmt_g17(double x);

// CSV with leading '#' comment lines, then the column header, then rows.
std::string render_csv(const std::vector<std::string>& comments,
                       const std::vector<std::string>& columns,
                       const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace badflow
