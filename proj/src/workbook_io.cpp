#include "sheetaudit/workbook_io.hpp"

#include "sheetaudit/error.hpp"
#include "sheetaudit/files.hpp"

namespace sheetaudit {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<WorkbookFormat> detect_format(std::string_view name, std::string_view bytes) {
    if (ends_with(name, ".xlsx") || ends_with(name, ".xlsm")) return WorkbookFormat::ooxml;
    if (ends_with(name, ".json")) return WorkbookFormat::fixture;
    if (bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4)) return WorkbookFormat::ooxml;
    const auto first = bytes.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && bytes[first] == '{') return WorkbookFormat::fixture;
    return std::nullopt;
}

}  // namespace

Workbook read_workbook(std::string_view bytes, const std::string& id, std::optional<WorkbookFormat> hint) {
    const auto format = hint ? hint : detect_format(id, bytes);
    if (!format) throw UnsupportedFormat("'" + id + "' is neither an .xlsx package nor a .sheet.json fixture");
    return *format == WorkbookFormat::ooxml ? read_xlsx(bytes, id) : read_fixture(bytes, id);
}

Workbook load_workbook(const std::filesystem::path& path, std::optional<WorkbookFormat> hint) {
    Workbook workbook = read_workbook(read_file(path), path.filename().string(), hint);
    workbook.origin = path.string();
    return workbook;
}

}  // namespace sheetaudit
