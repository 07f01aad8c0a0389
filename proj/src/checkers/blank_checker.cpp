#include "checker_support.hpp"

namespace sheetaudit::checkers {

namespace {

bool is_unicode_whitespace(char32_t c) {
    switch (c) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

/// Decodes one UTF-8 sequence starting at `i`; nullopt on malformed input.
std::optional<char32_t> decode_utf8(std::string_view text, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(text[i++]);
    if (lead < 0x80) return lead;
    int extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        return std::nullopt;
    }
    for (int k = 0; k < extra; ++k) {
        if (i >= text.size()) return std::nullopt;
        const auto byte = static_cast<unsigned char>(text[i++]);
        if ((byte & 0xC0) != 0x80) return std::nullopt;
        cp = (cp << 6) | (byte & 0x3F);
    }
    return cp;
}

}  // namespace

bool is_blank_text(std::string_view text, bool any_whitespace) {
    if (text.empty()) return false;
    for (std::size_t i = 0; i < text.size();) {
        const auto cp = decode_utf8(text, i);
        if (!cp) return false;
        if (any_whitespace ? !is_unicode_whitespace(*cp) : *cp != U' ') return false;
    }
    return true;
}

BlankOptions BlankOptions::from(const ParamSet& params) { return BlankOptions{params.boolean("include_all_whitespace")}; }

std::vector<Finding> check_blank_only_cells(const AnalysisContext& context, const BlankOptions& options) {
    std::vector<Finding> findings;
    for (const auto& sheet : context.workbook().sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.is_formula() || !cell.value().is_text()) continue;
            if (!is_blank_text(cell.value().as_text(), options.include_all_whitespace)) continue;
            findings.push_back(detail::make_finding(
                kBlankOnlyCells, context, context.cell_location(cell.address),
                "Cell " + detail::cell_label(context, cell.address) + " contains only blanks",
                "A cell holding spaces looks empty but is text: it breaks counts, lookups and arithmetic that "
                "treat it as a value, and hides that something was typed there.",
                "Clear the cell's contents instead of overwriting it with spaces."));
        }
    }
    return findings;
}

std::unique_ptr<RuleChecker> make_blank_checker() {
    CheckerDescriptor d{
        std::string(kBlankOnlyCells),
        "Blank-only cells",
        "Reports cells which consist only of one or more blanks (spaces).",
        {
            {"include_all_whitespace", ParamType::boolean, false,
             "Treat any Unicode white space (tabs, non-breaking spaces) like a blank.", std::nullopt},
        }};
    return std::make_unique<detail::FunctionChecker<BlankOptions>>(std::move(d), &check_blank_only_cells);
}

}  // namespace sheetaudit::checkers
