#pragma once

#include "sheetaudit/evaluation.hpp"
#include "sheetaudit/policy.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sheetaudit {

/// Rectangle of cells; findings whose location overlaps it pass the filter.
struct CellWindow {
    std::optional<std::string> sheet_name;  ///< Any sheet when empty; compared case-insensitively.
    int first_column = 0;
    int first_row = 0;
    int last_column = 0;
    int last_row = 0;

    friend bool operator==(const CellWindow&, const CellWindow&) = default;
};

/// Every present dimension must match. An empty FilterSpec selects everything.
struct FilterSpec {
    std::optional<std::set<std::string>> workbook_ids;
    std::optional<std::set<std::string>> checker_ids;
    std::optional<std::set<Severity>> severities;
    std::optional<std::set<int>> sheet_indices;
    std::optional<CellWindow> cells;

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// Parses "checker=a,b;severity=error;workbook=w1;sheet=0,2;cells=Sheet1!A1:C9".
/// Throws InvalidDocument on unknown keys or malformed values.
FilterSpec parse_filter(std::string_view text);

bool matches(const Finding& finding, const FilterSpec& filter);

/// Findings of the run passing the filter, in run order.
std::vector<Finding> filter_findings(const AnalysisRun& run, const FilterSpec& filter);

enum class GroupKey { by_cell, by_checker, by_workbook };

std::string_view to_string(GroupKey key);
std::optional<GroupKey> parse_group_key(std::string_view text);

struct FindingGroup {
    std::string label;
    std::vector<Finding> findings;

    friend bool operator==(const FindingGroup&, const FindingGroup&) = default;
};

/// Partition by the key; groups sorted by label, input order kept inside a
/// group. Cell labels are sheet-qualified ("Sheet1!B4"); workbook-level
/// findings go to "(workbook)".
std::vector<FindingGroup> group_findings(const std::vector<Finding>& findings, GroupKey key);

struct ReportTotals {
    std::size_t findings = 0;
    std::map<std::string, std::size_t> by_checker;   ///< Every enabled checker, zeros included.
    std::map<std::string, std::size_t> by_workbook;  ///< Every analysed workbook, zeros included.

    friend bool operator==(const ReportTotals&, const ReportTotals&) = default;
};

struct Report {
    AnalysisRun run;  ///< Metadata plus the selected findings.
    GroupKey group_by = GroupKey::by_checker;
    std::vector<FindingGroup> groups;
    ReportTotals totals;
    std::optional<EvaluationResult> evaluation;

    friend bool operator==(const Report&, const Report&) = default;
};

Report build_report(const AnalysisRun& run, GroupKey key = GroupKey::by_checker, const FilterSpec& filter = {});

enum class ReportFormat { json, text };

std::optional<ReportFormat> parse_report_format(std::string_view text);

/// JSON (schema_version 1, stable key order) or a plain-text listing.
std::string serialize_report(const Report& report, ReportFormat format);

/// Inverse of the JSON form. Throws InvalidDocument.
Report deserialize_report(std::string_view json);

/// Writes the serialised report to `path`, atomically. Throws IoFailure.
void write_report(const Report& report, ReportFormat format, const std::string& path);

/// Plain-text table of an evaluation.
std::string format_evaluation_text(const EvaluationResult& result);

}  // namespace sheetaudit
