#ifndef ATTRITION_IO_HPP
#define ATTRITION_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attrition/rational.hpp"

namespace attrition {

/// All machine-readable JSON output keeps insertion order so reruns are
/// byte-identical.
using ojson = nlohmann::ordered_json;

/// Quotes a CSV field when it contains a comma, a quote or a line break;
/// embedded quotes are doubled.
std::string csv_escape(const std::string& field);

/// One CSV line, LF-terminated.
std::string csv_row(const std::vector<std::string>& fields);

/// Writes header + rows as UTF-8 with LF line endings. Creates parent
/// directories. Throws std::runtime_error on I/O failure.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Serialized with 2-space indent and a trailing newline.
void write_json_file(const std::filesystem::path& path, const ojson& value);

/// Shortest decimal digits that round-trip to the same double.
std::string format_double(double x);

/// A rational as {"exact": "num/den", "approx": double}.
ojson rat_json(const Rat& r);

std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a, for config fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace attrition

#endif
