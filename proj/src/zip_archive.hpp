#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace sheetaudit::detail {

/// Read-only view of a ZIP archive held in memory. Supports stored and
/// deflated members; ZIP64 and encrypted members are rejected.
class ZipArchive {
public:
    /// Throws MalformedWorkbook when the central directory cannot be read.
    explicit ZipArchive(std::string_view bytes);

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    /// Decompressed member contents, or nullopt when absent.
    std::optional<std::string> read(const std::string& name) const;

private:
    struct Entry {
        std::size_t local_header_offset = 0;
        std::size_t compressed_size = 0;
        std::size_t uncompressed_size = 0;
        int method = 0;
        std::uint32_t checksum = 0;
    };

    std::string_view bytes_;
    std::map<std::string, Entry> entries_;
};

}  // namespace sheetaudit::detail
