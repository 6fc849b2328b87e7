#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace specdiff {

/// Plain-text key=value records, one per line, keys sorted on write.
/// Blank lines and lines starting with '#' are ignored on read.
using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// 64-bit FNV-1a of the key=value lines, as 16 hex digits.
std::string manifest_hash(const Manifest& m);

}  // namespace specdiff
