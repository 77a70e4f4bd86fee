#pragma once

#include <iosfwd>
#include <vector>

#include "loglab/paths.hpp"

namespace loglab {

// One JSON object per line: {"family", "d", "M", "j", "denominator", "vertices": [[...], ...]}.
void write_path_jsonl(std::ostream& out, const Path& path);
std::vector<Path> read_paths_jsonl(std::istream& in);

}  // namespace loglab
