#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetaudit {

/// Position of a cell: 0-based sheet index, column and row.
struct CellAddress {
    int sheet_index = 0;
    int column = 0;
    int row = 0;

    friend auto operator<=>(const CellAddress&, const CellAddress&) = default;
};

/// Result of decoding an A1-style address such as "$B$2".
struct A1Address {
    int column = 0;
    int row = 0;
    bool column_absolute = false;
    bool row_absolute = false;

    friend bool operator==(const A1Address&, const A1Address&) = default;
};

/// Decodes "[$]letters[$]digits". Letters are case-insensitive; the row is
/// 1-based in the text and 0-based in the result. Throws MalformedAddress.
A1Address parse_a1_address(std::string_view text);

/// Bijective base-26 column label: 0 -> "A", 25 -> "Z", 26 -> "AA".
std::string column_label(int column);

std::string format_a1(const A1Address& address);
std::string format_a1(int column, int row);

/// Formats a sheet name for use in a reference, quoting it when needed.
std::string quote_sheet_name(std::string_view name);

/// Standard spreadsheet error values.
inline constexpr std::string_view kErrorCodes[] = {
    "#DIV/0!", "#N/A", "#NAME?", "#NULL!", "#NUM!", "#REF!", "#VALUE!",
};

bool is_error_code(std::string_view text);

struct ErrorCode {
    std::string code;
    friend bool operator==(const ErrorCode&, const ErrorCode&) = default;
};

class CellValue {
public:
    using Storage = std::variant<std::monostate, double, std::string, bool, ErrorCode>;

    CellValue() = default;

    static CellValue number(double value) { return CellValue(Storage(std::in_place_type<double>, value)); }
    static CellValue text(std::string value) { return CellValue(Storage(std::in_place_type<std::string>, std::move(value))); }
    static CellValue boolean(bool value) { return CellValue(Storage(std::in_place_type<bool>, value)); }
    /// Throws MalformedWorkbook when `code` is not a standard error value.
    static CellValue error(std::string code);

    bool is_empty() const noexcept { return std::holds_alternative<std::monostate>(storage_); }
    bool is_number() const noexcept { return std::holds_alternative<double>(storage_); }
    bool is_text() const noexcept { return std::holds_alternative<std::string>(storage_); }
    bool is_boolean() const noexcept { return std::holds_alternative<bool>(storage_); }
    bool is_error() const noexcept { return std::holds_alternative<ErrorCode>(storage_); }

    double as_number() const { return std::get<double>(storage_); }
    const std::string& as_text() const { return std::get<std::string>(storage_); }
    bool as_boolean() const { return std::get<bool>(storage_); }
    const std::string& as_error() const { return std::get<ErrorCode>(storage_).code; }

    const Storage& storage() const noexcept { return storage_; }

    friend bool operator==(const CellValue&, const CellValue&) = default;

private:
    explicit CellValue(Storage storage) : storage_(std::move(storage)) {}
    Storage storage_;
};

struct FormulaContent {
    std::string source;  ///< Verbatim, starts with '='.
    CellValue cached;
    friend bool operator==(const FormulaContent&, const FormulaContent&) = default;
};

struct Cell {
    CellAddress address;
    std::variant<CellValue, FormulaContent> content;
    bool locked = true;

    bool is_formula() const noexcept { return std::holds_alternative<FormulaContent>(content); }
    const FormulaContent& formula() const { return std::get<FormulaContent>(content); }
    const CellValue& value() const { return std::get<CellValue>(content); }

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Grid key ordered row-major, which is the iteration order of Sheet::cells.
struct GridPosition {
    int row = 0;
    int column = 0;
    friend auto operator<=>(const GridPosition&, const GridPosition&) = default;
};

struct Sheet {
    std::string name;
    std::map<GridPosition, Cell> cells;
    bool protection_enabled = false;

    const Cell* find(int column, int row) const;

    friend bool operator==(const Sheet&, const Sheet&) = default;
};

/// Immutable after loading. Sheets keep their workbook order.
struct Workbook {
    std::string id;
    std::vector<Sheet> sheets;
    std::string origin;

    std::optional<int> sheet_index(std::string_view name) const;
    std::size_t formula_count() const;

    friend bool operator==(const Workbook&, const Workbook&) = default;
};

/// Returns the stored cell, or an empty locked cell when absent.
/// Throws SheetOutOfRange for an invalid sheet index.
Cell cell_at(const Workbook& workbook, const CellAddress& address);

/// Inserts `cell` into its sheet honouring sparsity: an empty, locked,
/// non-formula cell is not stored. Used by the loaders and by tests.
void put_cell(Workbook& workbook, Cell cell);

/// Checks the structural invariants (at least one sheet, unique sheet names,
/// non-empty id, formula sources starting with '='). Throws MalformedWorkbook.
void validate_workbook(const Workbook& workbook);

}  // namespace sheetaudit
