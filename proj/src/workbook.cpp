#include "sheetaudit/workbook.hpp"

#include "sheetaudit/error.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

namespace sheetaudit {

namespace {

bool is_ascii_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

// Seven letters already exceed any host application's column range.
constexpr std::size_t kMaxColumnLetters = 7;

[[noreturn]] void malformed(std::string_view text) {
    throw MalformedAddress("malformed cell address '" + std::string(text) + "'");
}

}  // namespace

A1Address parse_a1_address(std::string_view text) {
    A1Address result;
    std::size_t i = 0;
    if (i < text.size() && text[i] == '$') {
        result.column_absolute = true;
        ++i;
    }
    const std::size_t letters_begin = i;
    long long column = 0;
    while (i < text.size() && is_ascii_letter(text[i])) {
        const int digit = std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1;
        column = column * 26 + digit;
        ++i;
    }
    const std::size_t letter_count = i - letters_begin;
    if (letter_count == 0 || letter_count > kMaxColumnLetters) malformed(text);

    if (i < text.size() && text[i] == '$') {
        result.row_absolute = true;
        ++i;
    }
    const std::size_t digits_begin = i;
    long long row = 0;
    while (i < text.size() && is_ascii_digit(text[i])) {
        row = row * 10 + (text[i] - '0');
        if (row > std::numeric_limits<int>::max()) malformed(text);
        ++i;
    }
    if (i == digits_begin || i != text.size() || row == 0) malformed(text);

    result.column = static_cast<int>(column - 1);
    result.row = static_cast<int>(row - 1);
    return result;
}

std::string column_label(int column) {
    std::string label;
    long long n = static_cast<long long>(column) + 1;
    while (n > 0) {
        const long long rem = (n - 1) % 26;
        label.push_back(static_cast<char>('A' + rem));
        n = (n - 1) / 26;
    }
    std::reverse(label.begin(), label.end());
    return label;
}

std::string format_a1(const A1Address& address) {
    std::string out;
    if (address.column_absolute) out += '$';
    out += column_label(address.column);
    if (address.row_absolute) out += '$';
    out += std::to_string(address.row + 1);
    return out;
}

std::string format_a1(int column, int row) { return format_a1(A1Address{column, row, false, false}); }

std::string quote_sheet_name(std::string_view name) {
    bool bare = !name.empty() && (is_ascii_letter(name.front()) || name.front() == '_');
    for (char c : name) {
        if (!(is_ascii_letter(c) || is_ascii_digit(c) || c == '_' || c == '.')) bare = false;
    }
    if (bare) {
        // A name that reads like a cell reference must be quoted.
        std::size_t i = 0;
        while (i < name.size() && is_ascii_letter(name[i])) ++i;
        if (i > 0 && i <= 3 && i < name.size() &&
            std::all_of(name.begin() + i, name.end(), [](char c) { return is_ascii_digit(c); }))
            bare = false;
    }
    if (bare) return std::string(name);
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

bool is_error_code(std::string_view text) {
    return std::find(std::begin(kErrorCodes), std::end(kErrorCodes), text) != std::end(kErrorCodes);
}

CellValue CellValue::error(std::string code) {
    if (!is_error_code(code)) throw MalformedWorkbook("unknown error value '" + code + "'");
    return CellValue(Storage(std::in_place_type<ErrorCode>, ErrorCode{std::move(code)}));
}

const Cell* Sheet::find(int column, int row) const {
    auto it = cells.find(GridPosition{row, column});
    return it == cells.end() ? nullptr : &it->second;
}

std::optional<int> Workbook::sheet_index(std::string_view name) const {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string wanted = lower(name);
    for (std::size_t i = 0; i < sheets.size(); ++i) {
        if (lower(sheets[i].name) == wanted) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::size_t Workbook::formula_count() const {
    std::size_t count = 0;
    for (const auto& sheet : sheets) {
        for (const auto& [pos, cell] : sheet.cells) count += cell.is_formula() ? 1 : 0;
    }
    return count;
}

Cell cell_at(const Workbook& workbook, const CellAddress& address) {
    if (address.sheet_index < 0 || address.sheet_index >= static_cast<int>(workbook.sheets.size())) {
        throw SheetOutOfRange("sheet index " + std::to_string(address.sheet_index) + " out of range for workbook '" +
                              workbook.id + "'");
    }
    if (const Cell* cell = workbook.sheets[address.sheet_index].find(address.column, address.row)) return *cell;
    return Cell{address, CellValue{}, true};
}

void put_cell(Workbook& workbook, Cell cell) {
    if (cell.address.sheet_index < 0 || cell.address.sheet_index >= static_cast<int>(workbook.sheets.size())) {
        throw SheetOutOfRange("sheet index " + std::to_string(cell.address.sheet_index) + " out of range");
    }
    auto& cells = workbook.sheets[cell.address.sheet_index].cells;
    const GridPosition key{cell.address.row, cell.address.column};
    if (!cell.is_formula() && cell.value().is_empty() && cell.locked) {
        cells.erase(key);
        return;
    }
    cells.insert_or_assign(key, std::move(cell));
}

void validate_workbook(const Workbook& workbook) {
    if (workbook.id.empty()) throw MalformedWorkbook("workbook id must not be empty");
    if (workbook.sheets.empty()) throw MalformedWorkbook("workbook '" + workbook.id + "' has no sheets");
    std::set<std::string> names;
    for (const auto& sheet : workbook.sheets) {
        std::string lowered = sheet.name;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (sheet.name.empty()) throw MalformedWorkbook("empty sheet name in '" + workbook.id + "'");
        if (!names.insert(lowered).second) throw MalformedWorkbook("duplicate sheet name '" + sheet.name + "'");
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.address.column < 0 || cell.address.row < 0) throw MalformedWorkbook("negative cell coordinate");
            if (cell.is_formula()) {
                const auto& src = cell.formula().source;
                const auto first = src.find_first_not_of(" \t\r\n");
                if (first == std::string::npos || src[first] != '=')
                    throw MalformedWorkbook("formula in " + format_a1(pos.column, pos.row) + " does not start with '='");
            }
        }
    }
}

}  // namespace sheetaudit
