#pragma once

#include <filesystem>
#include <string>

#include "bstab/linalg.hpp"

namespace bstab {

/// Plain-text matrix format: a "rows cols" header line, then one row per
/// line of whitespace-separated entries "a", "a+bi" or "bi". Lines starting
/// with '#' are comments.
CMatrix parse_matrix(const std::string& text, const std::string& source = "<string>");
CMatrix read_matrix(const std::filesystem::path& path);

std::string format_matrix(const CMatrix& m);

/// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_matrix(const std::filesystem::path& path, const CMatrix& m);

/// "%.12g" formatting shared by every CSV writer.
std::string format_number(double v);

}  // namespace bstab
