// output.hpp: CSV tables, SHA-256 digests, output manifests

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wgqed {

// Column-major numeric table. Header cells carry units, e.g. "t_ps".
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    void add(std::string name, std::vector<double> values);
    std::size_t rows() const;
};

// RFC 4180: comma separated, LF line ends, fields quoted when they contain a comma,
// quote or line break; numbers as %.17g. Throws std::runtime_error on ragged columns.
std::string to_csv(const CsvTable& table);

// Keeps every stride-th row plus the last so that at most max_rows remain.
CsvTable decimate(const CsvTable& table, std::size_t max_rows);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes bytes to dir/name (binary, no newline translation).
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& bytes);

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::uintmax_t bytes{0};
};

// Every regular file under dir except the manifest itself, sorted by relative path.
std::vector<ManifestEntry> scan_directory(const std::filesystem::path& dir, const std::string& manifest_name);

// "<sha256>  <file>\n" lines, the sha256sum text format.
std::string manifest_text(const std::vector<ManifestEntry>& entries);

// True when every file listed in the manifest exists with the listed digest and no
// unlisted file is present.
bool verify_manifest(const std::filesystem::path& dir, const std::string& manifest_name);

} // namespace wgqed
