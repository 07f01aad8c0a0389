#include "zip_archive.hpp"

#include "sheetaudit/error.hpp"

#include <zlib.h>

#include <cstdint>

namespace sheetaudit::detail {

namespace {

constexpr std::uint32_t kEndOfCentralDirectory = 0x06054b50;
constexpr std::uint32_t kCentralDirectoryEntry = 0x02014b50;
constexpr std::uint32_t kLocalFileHeader = 0x04034b50;
constexpr std::size_t kEocdSize = 22;
constexpr std::size_t kMaxMemberSize = std::size_t{1} << 30;

[[noreturn]] void broken(const std::string& what) { throw MalformedWorkbook("broken zip archive: " + what); }

std::uint32_t read_u32(std::string_view bytes, std::size_t at) {
    if (at + 4 > bytes.size()) broken("truncated record");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + at);
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

std::uint16_t read_u16(std::string_view bytes, std::size_t at) {
    if (at + 2 > bytes.size()) broken("truncated record");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + at);
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

}  // namespace

ZipArchive::ZipArchive(std::string_view bytes) : bytes_(bytes) {
    if (bytes.size() < kEocdSize) broken("too small");
    // The end record sits at the tail, possibly followed by a comment of up to 64 KiB.
    std::size_t eocd = std::string_view::npos;
    const std::size_t lowest = bytes.size() > kEocdSize + 0xFFFF ? bytes.size() - kEocdSize - 0xFFFF : 0;
    for (std::size_t at = bytes.size() - kEocdSize + 1; at-- > lowest;) {
        if (read_u32(bytes, at) == kEndOfCentralDirectory) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string_view::npos) broken("no end of central directory");

    const std::size_t count = read_u16(bytes, eocd + 10);
    const std::size_t dir_size = read_u32(bytes, eocd + 12);
    std::size_t at = read_u32(bytes, eocd + 16);
    if (count == 0xFFFF || at == 0xFFFFFFFF) broken("ZIP64 archives are not supported");
    if (at + dir_size > bytes.size()) broken("central directory out of bounds");

    for (std::size_t i = 0; i < count; ++i) {
        if (read_u32(bytes, at) != kCentralDirectoryEntry) broken("bad central directory entry");
        const std::uint16_t flags = read_u16(bytes, at + 8);
        Entry entry;
        entry.method = read_u16(bytes, at + 10);
        entry.checksum = read_u32(bytes, at + 16);
        entry.compressed_size = read_u32(bytes, at + 20);
        entry.uncompressed_size = read_u32(bytes, at + 24);
        const std::size_t name_len = read_u16(bytes, at + 28);
        const std::size_t extra_len = read_u16(bytes, at + 30);
        const std::size_t comment_len = read_u16(bytes, at + 32);
        entry.local_header_offset = read_u32(bytes, at + 42);
        if (at + 46 + name_len > bytes.size()) broken("entry name out of bounds");
        std::string name(bytes.substr(at + 46, name_len));
        if (flags & 0x1) broken("encrypted member '" + name + "'");
        entries_.emplace(std::move(name), entry);
        at += 46 + name_len + extra_len + comment_len;
    }
}

std::optional<std::string> ZipArchive::read(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) return std::nullopt;
    const Entry& entry = it->second;

    const std::size_t header = entry.local_header_offset;
    if (read_u32(bytes_, header) != kLocalFileHeader) broken("bad local header for '" + name + "'");
    const std::size_t data = header + 30 + read_u16(bytes_, header + 26) + read_u16(bytes_, header + 28);
    if (data + entry.compressed_size > bytes_.size()) broken("member '" + name + "' out of bounds");
    const std::string_view compressed = bytes_.substr(data, entry.compressed_size);

    auto verified = [&](std::string out) {
        const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
        if (static_cast<std::uint32_t>(crc) != entry.checksum) broken("checksum mismatch in '" + name + "'");
        return out;
    };
    if (entry.method == 0) return verified(std::string(compressed));
    if (entry.method != 8) broken("unsupported compression method for '" + name + "'");
    if (entry.uncompressed_size > kMaxMemberSize) broken("member '" + name + "' too large");
    if (entry.uncompressed_size == 0) return verified(std::string{});

    std::string out(entry.uncompressed_size, '\0');
    z_stream stream{};
    if (inflateInit2(&stream, -MAX_WBITS) != Z_OK) broken("zlib initialisation failed");
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    stream.avail_in = static_cast<uInt>(compressed.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&stream, Z_FINISH);
    const std::size_t produced = stream.total_out;
    inflateEnd(&stream);
    if (rc != Z_STREAM_END || produced != entry.uncompressed_size) broken("corrupt deflate data in '" + name + "'");
    return verified(std::move(out));
}

}  // namespace sheetaudit::detail
