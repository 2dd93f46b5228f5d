#pragma once

#include "mfglab/torus_grid.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mfglab {

/// Binary layout: 16-byte magic, then d, n and the field count as little-endian
/// u64, then every field's samples as little-endian binary64 in node order.
/// Writes go through a temporary file and a rename.
void save_fields(std::span<const PeriodicField> fields, const std::filesystem::path& path);
void save_field(const PeriodicField& field, const std::filesystem::path& path);

/// FormatError (with byte offsets) on a bad magic, header or truncation; IoError
/// when unreadable; ConfigError when expected_dim is given and differs.
std::vector<PeriodicField> load_fields(const std::filesystem::path& path, std::optional<int> expected_dim = {});
PeriodicField load_field(const std::filesystem::path& path, std::optional<int> expected_dim = {});

/// Text form for inspection: header "x,value" or "x,y,value", one row per node.
void save_field_csv(const PeriodicField& field, const std::filesystem::path& path);

/// Write `contents` to path via a sibling temporary and rename.
void write_atomically(const std::filesystem::path& path, std::string_view contents);

} // namespace mfglab
