#pragma once

#include "sheetaudit/workbook.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace sheetaudit {

enum class WorkbookFormat { ooxml, fixture };

/// Loads a workbook from disk. Without a hint the format is detected from the
/// extension (".xlsx", ".json") and then from the leading bytes. The
/// workbook id is the file name.
///
/// Throws UnreadableFile, UnsupportedFormat or MalformedWorkbook.
Workbook load_workbook(const std::filesystem::path& path, std::optional<WorkbookFormat> hint = std::nullopt);

/// Same as load_workbook but from an in-memory buffer; `id` names the result.
Workbook read_workbook(std::string_view bytes, const std::string& id,
                       std::optional<WorkbookFormat> hint = std::nullopt);

/// Fixture format (UTF-8 json, key order irrelevant):
///
///   {"id": "optional",
///    "sheets": [{"name": "Sheet1", "protection_enabled": false,
///                "cells": {"A1": {"value": 5},
///                          "B1": {"formula": "=A1+1", "cached": 6, "locked": false}}}]}
///
/// A value is a json number, string or bool, or {"error": "#N/A"}.
Workbook read_fixture(std::string_view text, const std::string& default_id);
std::string write_fixture(const Workbook& workbook);

/// Office Open XML spreadsheet (.xlsx) package.
Workbook read_xlsx(std::string_view bytes, const std::string& id);

}  // namespace sheetaudit
