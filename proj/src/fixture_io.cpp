#include "sheetaudit/error.hpp"
#include "sheetaudit/workbook_io.hpp"

#include <json.hpp>

namespace sheetaudit {

namespace {

using nlohmann::json;

CellValue value_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return CellValue::number(j.get<double>());
    if (j.is_string()) return CellValue::text(j.get<std::string>());
    if (j.is_boolean()) return CellValue::boolean(j.get<bool>());
    if (j.is_null()) return CellValue{};
    if (j.is_object() && j.size() == 1 && j.contains("error") && j["error"].is_string())
        return CellValue::error(j["error"].get<std::string>());
    throw MalformedWorkbook(where + ": unsupported value encoding");
}

json value_to_json(const CellValue& value) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else if constexpr (std::is_same_v<T, ErrorCode>) return json{{"error", v.code}};
            else return v;
        },
        value.storage());
}

}  // namespace

Workbook read_fixture(std::string_view text, const std::string& default_id) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedWorkbook("fixture is not valid json: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw MalformedWorkbook("fixture root must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "id" && key != "sheets") throw MalformedWorkbook("unknown fixture key '" + key + "'");
    }

    Workbook workbook;
    workbook.id = default_id;
    workbook.origin = "fixture:" + default_id;
    if (doc.contains("id")) {
        if (!doc["id"].is_string()) throw MalformedWorkbook("fixture id must be a string");
        workbook.id = doc["id"].get<std::string>();
    }
    if (!doc.contains("sheets") || !doc["sheets"].is_array())
        throw MalformedWorkbook("fixture needs a 'sheets' array");

    for (const auto& sheet_json : doc["sheets"]) {
        if (!sheet_json.is_object() || !sheet_json.contains("name") || !sheet_json["name"].is_string())
            throw MalformedWorkbook("every sheet needs a string 'name'");
        Sheet sheet;
        sheet.name = sheet_json["name"].get<std::string>();
        for (const auto& [key, value] : sheet_json.items()) {
            if (key == "name") continue;
            if (key == "protection_enabled") {
                if (!value.is_boolean()) throw MalformedWorkbook("protection_enabled must be a bool");
                sheet.protection_enabled = value.get<bool>();
            } else if (key != "cells") {
                throw MalformedWorkbook("unknown sheet key '" + key + "'");
            }
        }
        workbook.sheets.push_back(std::move(sheet));
        const int sheet_index = static_cast<int>(workbook.sheets.size()) - 1;

        if (!sheet_json.contains("cells")) continue;
        const json& cells = sheet_json["cells"];
        if (!cells.is_object()) throw MalformedWorkbook("'cells' must be an object keyed by A1 address");
        for (const auto& [a1, cell_json] : cells.items()) {
            A1Address parsed;
            try {
                parsed = parse_a1_address(a1);
            } catch (const MalformedAddress& e) {
                throw MalformedWorkbook(e.what());
            }
            if (parsed.column_absolute || parsed.row_absolute)
                throw MalformedWorkbook("fixture cell keys must be relative: '" + a1 + "'");
            if (!cell_json.is_object()) throw MalformedWorkbook(a1 + ": cell must be an object");

            Cell cell{CellAddress{sheet_index, parsed.column, parsed.row}, CellValue{}, true};
            const bool has_value = cell_json.contains("value");
            const bool has_formula = cell_json.contains("formula");
            if (has_value && has_formula) throw MalformedWorkbook(a1 + ": both value and formula given");
            for (const auto& [key, v] : cell_json.items()) {
                if (key == "value") {
                    cell.content = value_from_json(v, a1);
                } else if (key == "formula") {
                    if (!v.is_string()) throw MalformedWorkbook(a1 + ": formula must be a string");
                    FormulaContent formula{v.get<std::string>(), CellValue{}};
                    if (cell_json.contains("cached")) formula.cached = value_from_json(cell_json["cached"], a1);
                    cell.content = std::move(formula);
                } else if (key == "cached") {
                    if (!has_formula) throw MalformedWorkbook(a1 + ": cached without formula");
                } else if (key == "locked") {
                    if (!v.is_boolean()) throw MalformedWorkbook(a1 + ": locked must be a bool");
                    cell.locked = v.get<bool>();
                } else {
                    throw MalformedWorkbook(a1 + ": unknown cell key '" + key + "'");
                }
            }
            put_cell(workbook, std::move(cell));
        }
    }
    validate_workbook(workbook);
    return workbook;
}

std::string write_fixture(const Workbook& workbook) {
    nlohmann::ordered_json doc;
    doc["id"] = workbook.id;
    doc["sheets"] = nlohmann::ordered_json::array();
    for (const auto& sheet : workbook.sheets) {
        nlohmann::ordered_json sheet_json;
        sheet_json["name"] = sheet.name;
        sheet_json["protection_enabled"] = sheet.protection_enabled;
        nlohmann::ordered_json cells = nlohmann::ordered_json::object();
        for (const auto& [pos, cell] : sheet.cells) {
            nlohmann::ordered_json cell_json;
            if (cell.is_formula()) {
                cell_json["formula"] = cell.formula().source;
                if (!cell.formula().cached.is_empty()) cell_json["cached"] = value_to_json(cell.formula().cached);
            } else if (!cell.value().is_empty()) {
                cell_json["value"] = value_to_json(cell.value());
            }
            if (!cell.locked) cell_json["locked"] = false;
            cells[format_a1(pos.column, pos.row)] = std::move(cell_json);
        }
        sheet_json["cells"] = std::move(cells);
        doc["sheets"].push_back(std::move(sheet_json));
    }
    return doc.dump(2) + "\n";
}

}  // namespace sheetaudit
