#include "wgqed/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace wgqed {

namespace fs = std::filesystem;

void CsvTable::add(std::string name, std::vector<double> values) {
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
}

std::size_t CsvTable::rows() const { return columns.empty() ? 0 : columns.front().size(); }

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string hex(const unsigned char* data, unsigned len) {
    static const char* digits = "0123456789abcdef";
    std::string out(2 * len, '0');
    for (unsigned i = 0; i < len; ++i) {
        out[2 * i] = digits[data[i] >> 4];
        out[2 * i + 1] = digits[data[i] & 15];
    }
    return out;
}

struct DigestDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("sha256: digest initialisation failed");
        }
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
    }
    std::string finish() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw std::runtime_error("sha256: final failed");
        return hex(md.data(), len);
    }

private:
    std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

} // namespace

std::string to_csv(const CsvTable& table) {
    const std::size_t n = table.rows();
    if (table.header.size() != table.columns.size()) throw std::runtime_error("csv: header/column count mismatch");
    for (const auto& c : table.columns) {
        if (c.size() != n) throw std::runtime_error("csv: ragged columns");
    }
    std::string out;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j) out += ',';
        out += quote(table.header[j]);
    }
    out += '\n';
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (j) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", table.columns[j][i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

CsvTable decimate(const CsvTable& table, std::size_t max_rows) {
    const std::size_t n = table.rows();
    if (max_rows == 0 || n <= max_rows) return table;
    const std::size_t m = std::max<std::size_t>(max_rows, 2);
    const std::size_t stride = (n - 1 + m - 2) / (m - 1);
    CsvTable out;
    out.header = table.header;
    for (const auto& col : table.columns) {
        std::vector<double> kept;
        for (std::size_t i = 0; i < n; i += stride) kept.push_back(col[i]);
        if ((n - 1) % stride != 0) kept.push_back(col.back());
        out.columns.push_back(std::move(kept));
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.finish();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot open " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.finish();
}

void write_file(const fs::path& dir, const std::string& name, const std::string& bytes) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + (dir / name).string());
}

std::vector<ManifestEntry> scan_directory(const fs::path& dir, const std::string& manifest_name) {
    std::vector<ManifestEntry> entries;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == manifest_name) continue;
        entries.push_back({rel, sha256_file(e.path()), e.file_size()});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return entries;
}

std::string manifest_text(const std::vector<ManifestEntry>& entries) {
    std::string out;
    for (const auto& e : entries) out += e.sha256 + "  " + e.file + "\n";
    return out;
}

bool verify_manifest(const fs::path& dir, const std::string& manifest_name) {
    std::ifstream in(dir / manifest_name, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str() == manifest_text(scan_directory(dir, manifest_name));
}

} // namespace wgqed
