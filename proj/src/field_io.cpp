#include "mfglab/field_io.hpp"

#include "mfglab/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace mfglab {

namespace {

constexpr std::array<char, 16> magic{'M', 'F', 'G', 'L', 'A', 'B', '-', 'F', 'I', 'E', 'L', 'D', '\0', '\0', '\0', '\1'};
constexpr std::size_t header_bytes = 16 + 3 * 8;

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint64_t get_u64(const std::string& in, std::size_t offset)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

void require_bytes(const std::string& in, std::size_t offset, std::size_t need, const char* what)
{
    if (in.size() < offset + need) {
        throw FormatError("truncated field file: " + std::string(what) + " at offset " + std::to_string(offset)
            + " needs " + std::to_string(offset + need - in.size()) + " more bytes");
    }
}

} // namespace

void write_atomically(const std::filesystem::path& path, std::string_view contents)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void save_fields(std::span<const PeriodicField> fields, const std::filesystem::path& path)
{
    if (fields.empty()) {
        throw ConfigError("nothing to save");
    }
    const Grid& g = fields.front().grid();
    std::string out(magic.begin(), magic.end());
    put_u64(out, static_cast<std::uint64_t>(g.dim()));
    put_u64(out, static_cast<std::uint64_t>(g.n()));
    put_u64(out, fields.size());
    out.reserve(header_bytes + 8 * g.size() * fields.size());
    for (const PeriodicField& f : fields) {
        require_same_grid(g, f.grid(), "save_fields");
        for (double v : f.values()) {
            put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    write_atomically(path, out);
}

void save_field(const PeriodicField& field, const std::filesystem::path& path)
{
    save_fields(std::span(&field, 1), path);
}

std::vector<PeriodicField> load_fields(const std::filesystem::path& path, std::optional<int> expected_dim)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require_bytes(bytes, 0, magic.size(), "magic");
    if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
        throw FormatError("bad magic at offset 0 in " + path.string());
    }
    require_bytes(bytes, magic.size(), 24, "header");
    const std::uint64_t d = get_u64(bytes, 16);
    const std::uint64_t n = get_u64(bytes, 24);
    const std::uint64_t count = get_u64(bytes, 32);
    if (d < 1 || d > 2 || n < 8 || n > (1u << 20) || count < 1 || count > (1u << 20)) {
        throw FormatError("implausible header at offset 16: d=" + std::to_string(d) + " n=" + std::to_string(n)
            + " count=" + std::to_string(count));
    }
    const Grid g = make_grid(static_cast<int>(d), static_cast<int>(n));
    if (expected_dim && *expected_dim != g.dim()) {
        throw ConfigError("field file " + path.string() + " holds d=" + std::to_string(d) + " data, expected d="
            + std::to_string(*expected_dim));
    }
    const std::size_t body = 8 * g.size() * count;
    require_bytes(bytes, header_bytes, body, "sample block");
    if (bytes.size() != header_bytes + body) {
        throw FormatError(std::to_string(bytes.size() - header_bytes - body) + " trailing bytes after offset "
            + std::to_string(header_bytes + body));
    }
    std::vector<PeriodicField> out;
    std::size_t offset = header_bytes;
    for (std::uint64_t f = 0; f < count; ++f) {
        std::vector<double> v(g.size());
        for (double& x : v) {
            x = std::bit_cast<double>(get_u64(bytes, offset));
            offset += 8;
        }
        out.emplace_back(g, std::move(v));
    }
    return out;
}

PeriodicField load_field(const std::filesystem::path& path, std::optional<int> expected_dim)
{
    std::vector<PeriodicField> all = load_fields(path, expected_dim);
    if (all.size() != 1) {
        throw FormatError(path.string() + " holds " + std::to_string(all.size()) + " fields, expected one");
    }
    return std::move(all.front());
}

void save_field_csv(const PeriodicField& field, const std::filesystem::path& path)
{
    const Grid& g = field.grid();
    std::string out = g.dim() == 1 ? "x,value\n" : "x,y,value\n";
    char buf[96];
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        if (g.dim() == 1) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], field[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], field[i]);
        }
        out += buf;
    }
    write_atomically(path, out);
}

} // namespace mfglab
