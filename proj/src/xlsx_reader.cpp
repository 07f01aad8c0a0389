#include "sheetaudit/error.hpp"
#include "sheetaudit/formula.hpp"
#include "sheetaudit/workbook_io.hpp"
#include "xml_tree.hpp"
#include "zip_archive.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

namespace sheetaudit {

namespace {

using detail::XmlElement;

std::unique_ptr<XmlElement> read_part(const detail::ZipArchive& zip, const std::string& name, bool required) {
    auto bytes = zip.read(name);
    if (!bytes) {
        if (required) throw MalformedWorkbook("missing package part '" + name + "'");
        return nullptr;
    }
    return detail::parse_xml(*bytes, name);
}

bool xml_true(const std::string* value) { return value && (*value == "1" || *value == "true"); }
bool xml_false(const std::string* value) { return value && (*value == "0" || *value == "false"); }

/// Resolves a relationship target relative to the "xl/" directory.
std::string resolve_target(const std::string& target) {
    if (!target.empty() && target.front() == '/') return target.substr(1);
    if (target.rfind("../", 0) == 0) return target.substr(3);
    return "xl/" + target;
}

std::vector<std::string> read_shared_strings(const detail::ZipArchive& zip) {
    std::vector<std::string> strings;
    auto root = read_part(zip, "xl/sharedStrings.xml", false);
    if (!root) return strings;
    for (const XmlElement* si : root->children_named("si")) {
        // Plain <t> or rich-text runs <r><t/></r>; phonetic runs <rPh> are excluded.
        std::string text;
        for (const auto& child : si->children) {
            if (child->name == "t") text += child->text;
            else if (child->name == "r") {
                if (const XmlElement* t = child->child("t")) text += t->text;
            }
        }
        strings.push_back(std::move(text));
    }
    return strings;
}

/// Locked flag per cellXfs index. Cells default to locked.
std::vector<bool> read_locked_styles(const detail::ZipArchive& zip) {
    std::vector<bool> locked;
    auto root = read_part(zip, "xl/styles.xml", false);
    if (!root) return locked;
    const XmlElement* xfs = root->child("cellXfs");
    if (!xfs) return locked;
    for (const XmlElement* xf : xfs->children_named("xf")) {
        const XmlElement* protection = xf->child("protection");
        locked.push_back(!(protection && xml_false(protection->attribute("locked"))));
    }
    return locked;
}

double parse_number(const std::string& text, const std::string& where) {
    double value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size() || !std::isfinite(value))
        throw MalformedWorkbook(where + ": bad numeric value '" + text + "'");
    return value;
}

CellValue read_value(const XmlElement& c, const std::string& type, const std::vector<std::string>& shared,
                     const std::string& where) {
    const XmlElement* v = c.child("v");
    if (type == "inlineStr") {
        const XmlElement* is = c.child("is");
        return is ? CellValue::text(is->deep_text()) : CellValue{};
    }
    if (!v || v->text.empty()) return CellValue{};
    const std::string& text = v->text;
    if (type == "s") {
        const double index = parse_number(text, where);
        if (index < 0 || index >= static_cast<double>(shared.size()))
            throw MalformedWorkbook(where + ": shared string index out of range");
        return CellValue::text(shared[static_cast<std::size_t>(index)]);
    }
    if (type == "str" || type == "d") return CellValue::text(text);
    if (type == "b") return CellValue::boolean(text == "1" || text == "true");
    if (type == "e") return is_error_code(text) ? CellValue::error(text) : CellValue::text(text);
    if (type.empty() || type == "n") return CellValue::number(parse_number(text, where));
    throw MalformedWorkbook(where + ": unknown cell type '" + type + "'");
}

struct SharedFormula {
    std::string text;  // without '='
    int column = 0;
    int row = 0;
};

void read_sheet(const XmlElement& root, int sheet_index, Workbook& workbook, const std::vector<std::string>& shared,
                const std::vector<bool>& locked_styles) {
    Sheet& sheet = workbook.sheets[sheet_index];
    if (const XmlElement* protection = root.child("sheetProtection"))
        sheet.protection_enabled = xml_true(protection->attribute("sheet"));

    const XmlElement* data = root.child("sheetData");
    if (!data) return;
    std::unordered_map<std::string, SharedFormula> shared_formulas;

    for (const XmlElement* row : data->children_named("row")) {
        int next_column = 0;
        const std::string* row_attr = row->attribute("r");
        const int implicit_row = row_attr ? static_cast<int>(parse_number(*row_attr, "row")) - 1 : 0;
        for (const XmlElement* c : row->children_named("c")) {
            A1Address position{next_column, implicit_row, false, false};
            if (const std::string* r = c->attribute("r")) {
                try {
                    position = parse_a1_address(*r);
                } catch (const MalformedAddress& e) {
                    throw MalformedWorkbook(sheet.name + ": " + e.what());
                }
            }
            next_column = position.column + 1;
            const std::string where = sheet.name + "!" + format_a1(position.column, position.row);

            bool locked = true;
            if (const std::string* s = c->attribute("s")) {
                const auto style = static_cast<std::size_t>(parse_number(*s, where));
                if (style < locked_styles.size()) locked = locked_styles[style];
            }
            const std::string* type_attr = c->attribute("t");
            const std::string type = type_attr ? *type_attr : std::string{};
            CellValue value = read_value(*c, type, shared, where);

            Cell cell{CellAddress{sheet_index, position.column, position.row}, value, locked};
            if (const XmlElement* f = c->child("f")) {
                std::string text = f->text;
                const std::string* f_type = f->attribute("t");
                if (f_type && *f_type == "shared") {
                    const std::string* si = f->attribute("si");
                    if (!si) throw MalformedWorkbook(where + ": shared formula without index");
                    if (!text.empty()) {
                        shared_formulas[*si] = SharedFormula{text, position.column, position.row};
                    } else {
                        auto it = shared_formulas.find(*si);
                        if (it == shared_formulas.end()) throw MalformedWorkbook(where + ": unknown shared formula");
                        // Dependent cells store no text; derive it the way the host does.
                        try {
                            text = print_formula(shift_relative_references(parse_formula("=" + it->second.text),
                                                                           position.column - it->second.column,
                                                                           position.row - it->second.row))
                                       .substr(1);
                        } catch (const FormulaError&) {
                            // Untranslatable anchor; the host shows a broken reference.
                            text = "#REF!";
                        }
                    }
                }
                if (!text.empty()) cell.content = FormulaContent{"=" + text, std::move(value)};
            }
            put_cell(workbook, std::move(cell));
        }
    }
}

}  // namespace

Workbook read_xlsx(std::string_view bytes, const std::string& id) {
    const detail::ZipArchive zip(bytes);
    if (!zip.contains("xl/workbook.xml")) throw MalformedWorkbook("not a spreadsheet package: missing xl/workbook.xml");

    auto book = read_part(zip, "xl/workbook.xml", true);
    auto rels = read_part(zip, "xl/_rels/workbook.xml.rels", true);
    std::unordered_map<std::string, std::string> targets;
    for (const XmlElement* rel : rels->children_named("Relationship")) {
        const std::string* rid = rel->attribute("Id");
        const std::string* target = rel->attribute("Target");
        if (rid && target) targets[*rid] = resolve_target(*target);
    }

    const auto shared = read_shared_strings(zip);
    const auto locked_styles = read_locked_styles(zip);

    Workbook workbook;
    workbook.id = id;
    workbook.origin = id;
    const XmlElement* sheets = book->child("sheets");
    if (!sheets) throw MalformedWorkbook("workbook.xml has no <sheets>");
    for (const XmlElement* entry : sheets->children_named("sheet")) {
        const std::string* name = entry->attribute("name");
        const std::string* rid = entry->attribute("id");
        if (!name || !rid) throw MalformedWorkbook("sheet entry without name or relationship id");
        auto target = targets.find(*rid);
        if (target == targets.end()) throw MalformedWorkbook("sheet '" + *name + "' has no relationship target");
        workbook.sheets.push_back(Sheet{*name, {}, false});
        // Chart sheets and dialog sheets have no worksheet part; they stay empty.
        auto root = read_part(zip, target->second, true);
        if (root->name == "worksheet")
            read_sheet(*root, static_cast<int>(workbook.sheets.size()) - 1, workbook, shared, locked_styles);
    }
    validate_workbook(workbook);
    return workbook;
}

}  // namespace sheetaudit
