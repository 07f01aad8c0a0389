#include "sheetaudit/report.hpp"

#include "sheetaudit/error.hpp"
#include "sheetaudit/files.hpp"
#include "sheetaudit/json_codec.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace sheetaudit {

namespace {

using json::Json;

std::string lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::set<std::string> value_set(const std::string& key, const std::string& value) {
    std::set<std::string> out;
    for (auto& item : split(value, ',')) {
        if (item.empty()) throw InvalidDocument("filter '" + key + "': empty value");
        out.insert(std::move(item));
    }
    return out;
}

CellWindow parse_window(const std::string& text) {
    CellWindow window;
    std::string range = text;
    if (const auto bang = text.rfind('!'); bang != std::string::npos) {
        std::string sheet = text.substr(0, bang);
        if (sheet.size() >= 2 && sheet.front() == '\'' && sheet.back() == '\'') {
            std::string unquoted;
            for (std::size_t i = 1; i + 1 < sheet.size(); ++i) {
                unquoted += sheet[i];
                if (sheet[i] == '\'' && sheet[i + 1] == '\'') ++i;
            }
            sheet = unquoted;
        }
        if (sheet.empty()) throw InvalidDocument("filter 'cells': empty sheet name");
        window.sheet_name = sheet;
        range = text.substr(bang + 1);
    }
    const auto colon = range.find(':');
    try {
        const A1Address first = parse_a1_address(range.substr(0, colon));
        const A1Address last = colon == std::string::npos ? first : parse_a1_address(range.substr(colon + 1));
        window.first_column = std::min(first.column, last.column);
        window.last_column = std::max(first.column, last.column);
        window.first_row = std::min(first.row, last.row);
        window.last_row = std::max(first.row, last.row);
    } catch (const MalformedAddress& e) {
        throw InvalidDocument(std::string("filter 'cells': ") + e.what());
    }
    return window;
}

bool overlaps(const FindingLocation& location, const CellWindow& w) {
    auto sheet_ok = [&](const std::string& name) { return !w.sheet_name || lower(*w.sheet_name) == lower(name); };
    auto box = [&](const CellAddress& a, const CellAddress& b) {
        return a.column <= w.last_column && w.first_column <= b.column && a.row <= w.last_row && w.first_row <= b.row;
    };
    if (const auto* c = std::get_if<CellLocation>(&location)) return sheet_ok(c->sheet_name) && box(c->cell, c->cell);
    if (const auto* r = std::get_if<RangeLocation>(&location)) return sheet_ok(r->sheet_name) && box(r->first, r->last);
    if (const auto* s = std::get_if<SheetLocation>(&location)) return sheet_ok(s->sheet_name);
    return false;
}

std::string group_label(const Finding& f, GroupKey key) {
    switch (key) {
        case GroupKey::by_checker: return f.checker_id;
        case GroupKey::by_workbook: return f.workbook_id;
        case GroupKey::by_cell: break;
    }
    return location_label(f.location);
}

}  // namespace

FilterSpec parse_filter(std::string_view text) {
    FilterSpec filter;
    if (trim(text).empty()) return filter;
    for (const auto& clause : split(text, ';')) {
        if (clause.empty()) continue;
        const auto eq = clause.find('=');
        if (eq == std::string::npos) throw InvalidDocument("filter clause '" + clause + "' lacks '='");
        const std::string key = trim(std::string_view(clause).substr(0, eq));
        const std::string value = trim(std::string_view(clause).substr(eq + 1));
        if (key == "checker") {
            filter.checker_ids = value_set(key, value);
        } else if (key == "workbook") {
            filter.workbook_ids = value_set(key, value);
        } else if (key == "severity") {
            std::set<Severity> severities;
            for (const auto& s : value_set(key, value)) {
                const auto parsed = parse_severity(s);
                if (!parsed) throw InvalidDocument("filter 'severity': unknown severity '" + s + "'");
                severities.insert(*parsed);
            }
            filter.severities = std::move(severities);
        } else if (key == "sheet") {
            std::set<int> sheets;
            for (const auto& s : value_set(key, value)) {
                if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) ||
                    s.size() > 6)
                    throw InvalidDocument("filter 'sheet': '" + s + "' is not a sheet index");
                sheets.insert(std::stoi(s));
            }
            filter.sheet_indices = std::move(sheets);
        } else if (key == "cells") {
            filter.cells = parse_window(value);
        } else {
            throw InvalidDocument("unknown filter key '" + key + "'");
        }
    }
    return filter;
}

bool matches(const Finding& f, const FilterSpec& filter) {
    if (filter.workbook_ids && !filter.workbook_ids->count(f.workbook_id)) return false;
    if (filter.checker_ids && !filter.checker_ids->count(f.checker_id)) return false;
    if (filter.severities && !filter.severities->count(f.severity)) return false;
    if (filter.sheet_indices) {
        const auto sheet = location_sheet(f.location);
        if (!sheet || !filter.sheet_indices->count(*sheet)) return false;
    }
    if (filter.cells && !overlaps(f.location, *filter.cells)) return false;
    return true;
}

std::vector<Finding> filter_findings(const AnalysisRun& run, const FilterSpec& filter) {
    std::vector<Finding> out;
    std::copy_if(run.findings.begin(), run.findings.end(), std::back_inserter(out),
                 [&](const Finding& f) { return matches(f, filter); });
    return out;
}

std::string_view to_string(GroupKey key) {
    switch (key) {
        case GroupKey::by_cell: return "by_cell";
        case GroupKey::by_checker: return "by_checker";
        case GroupKey::by_workbook: return "by_workbook";
    }
    return "by_checker";
}

std::optional<GroupKey> parse_group_key(std::string_view text) {
    if (text == "by_cell" || text == "cell") return GroupKey::by_cell;
    if (text == "by_checker" || text == "checker") return GroupKey::by_checker;
    if (text == "by_workbook" || text == "workbook") return GroupKey::by_workbook;
    return std::nullopt;
}

std::vector<FindingGroup> group_findings(const std::vector<Finding>& findings, GroupKey key) {
    std::map<std::string, std::vector<Finding>> groups;
    for (const auto& f : findings) groups[group_label(f, key)].push_back(f);
    std::vector<FindingGroup> out;
    for (auto& [label, members] : groups) out.push_back(FindingGroup{label, std::move(members)});
    return out;
}

Report build_report(const AnalysisRun& run, GroupKey key, const FilterSpec& filter) {
    Report report;
    report.run = run;
    report.run.findings = filter_findings(run, filter);
    report.group_by = key;
    report.groups = group_findings(report.run.findings, key);
    report.totals.findings = report.run.findings.size();
    for (const auto& c : run.scenario.checkers) {
        if (c.enabled) report.totals.by_checker[c.checker_id] = 0;
    }
    for (const auto& w : run.workbooks) report.totals.by_workbook[w.id] = 0;
    for (const auto& f : report.run.findings) {
        ++report.totals.by_checker[f.checker_id];
        ++report.totals.by_workbook[f.workbook_id];
    }
    return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::json;
    if (text == "text") return ReportFormat::text;
    return std::nullopt;
}

namespace {

Json report_to_json(const Report& report) {
    Json totals{{"findings", report.totals.findings},
                {"by_checker", report.totals.by_checker},
                {"by_workbook", report.totals.by_workbook}};
    Json groups = Json::array();
    for (const auto& g : report.groups) {
        Json ids = Json::array();
        for (const auto& f : g.findings) ids.push_back(f.finding_id);
        groups.push_back(Json{{"label", g.label}, {"finding_ids", std::move(ids)}});
    }
    Json findings = Json::array();
    for (const auto& f : report.run.findings) findings.push_back(json::to_json(f));
    Json doc{{"schema_version", 1},
             {"run", json::run_metadata_to_json(report.run)},
             {"group_by", to_string(report.group_by)},
             {"totals", std::move(totals)},
             {"groups", std::move(groups)},
             {"findings", std::move(findings)}};
    if (report.evaluation) doc["evaluation"] = json::to_json(*report.evaluation);
    return doc;
}

std::string fmt_ratio(double value, bool undefined) {
    if (undefined) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    return buf;
}

std::string report_to_text(const Report& report) {
    const AnalysisRun& run = report.run;
    std::ostringstream out;
    out << "Run " << run.run_id << " (scenario '" << run.scenario.name << "')\n";
    out << "Workbooks: " << run.workbooks.size() << ", findings: " << report.totals.findings << "\n";
    for (const auto& g : report.groups) {
        out << "\n== " << g.label << " (" << g.findings.size() << ")\n";
        for (const auto& f : g.findings) {
            out << "[" << to_string(f.severity) << "] " << f.workbook_id << " " << location_label(f.location) << " "
                << f.checker_id << ": " << f.message << "\n";
            if (!f.explanation.empty()) out << "    Why: " << f.explanation << "\n";
            if (!f.suggestion.empty()) out << "    Fix: " << f.suggestion << "\n";
            if (!f.related_cells.empty()) {
                out << "    Related:";
                const WorkbookSummary* w = run.workbook(f.workbook_id);
                for (const auto& c : f.related_cells) {
                    out << " ";
                    if (w && c.sheet_index >= 0 && c.sheet_index < static_cast<int>(w->sheet_names.size()))
                        out << quote_sheet_name(w->sheet_names[c.sheet_index]) << "!";
                    out << format_a1(c.column, c.row);
                }
                out << "\n";
            }
        }
    }
    out << "\nTotals by checker:\n";
    for (const auto& [id, n] : report.totals.by_checker) out << "  " << id << ": " << n << "\n";
    out << "Totals by workbook:\n";
    for (const auto& [id, n] : report.totals.by_workbook) out << "  " << id << ": " << n << "\n";
    if (!run.skipped_formulas.empty()) {
        out << "Skipped formulas: " << run.skipped_formulas.size() << "\n";
        for (const auto& s : run.skipped_formulas) {
            const WorkbookSummary* w = run.workbook(s.workbook_id);
            std::string where = format_a1(s.cell.column, s.cell.row);
            if (w && s.cell.sheet_index < static_cast<int>(w->sheet_names.size()))
                where = quote_sheet_name(w->sheet_names[s.cell.sheet_index]) + "!" + where;
            out << "  " << s.workbook_id << " " << where << ": " << s.reason << "\n";
        }
    }
    if (!run.checker_failures.empty()) {
        out << "Checker failures:\n";
        for (const auto& c : run.checker_failures)
            out << "  " << c.checker_id << " on " << c.workbook_id << ": " << c.detail << "\n";
    }
    if (report.evaluation) out << "\n" << format_evaluation_text(*report.evaluation);
    return out.str();
}

}  // namespace

std::string format_evaluation_text(const EvaluationResult& result) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %4s %4s %4s %4s %9s %7s %8s %7s\n", "checker", "tp", "fp", "fn", "tn",
                  "precision", "recall", "accuracy", "mcc");
    out << line;
    for (const auto& m : result.metrics) {
        std::snprintf(line, sizeof line, "%-28s %4d %4d %4d %4d %9s %7s %8s %7s%s\n", m.checker_id.c_str(), m.tp, m.fp,
                      m.fn, m.tn, fmt_ratio(m.precision, m.precision_undefined).c_str(),
                      fmt_ratio(m.recall, m.recall_undefined).c_str(), fmt_ratio(m.accuracy, m.accuracy_undefined).c_str(),
                      fmt_ratio(m.mcc, m.mcc_undefined).c_str(), m.perfect ? "  perfect" : "");
        out << line;
    }
    out << "Ranking:";
    for (std::size_t i = 0; i < result.ranking.size(); ++i) out << (i ? ", " : " ") << result.ranking[i];
    out << "\n";
    if (!result.cell_matches.empty()) {
        out << "Cell-level matches:\n";
        for (const auto& c : result.cell_matches)
            out << "  " << c.checker_id << ": " << c.hits << " hits, " << c.misses << " misses, " << c.spurious
                << " spurious\n";
    }
    for (const auto& n : result.notes) out << "Note: " << n << "\n";
    return out.str();
}

std::string serialize_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::text) return report_to_text(report);
    return report_to_json(report).dump(2) + "\n";
}

Report deserialize_report(std::string_view text) {
    const Json doc = json::parse(text, "report");
    if (!doc.is_object()) throw InvalidDocument("report: expected an object");
    for (const auto& [key, value] : doc.items()) {
        static const char* known[] = {"schema_version", "run", "group_by", "totals", "groups", "findings", "evaluation"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
            throw InvalidDocument("report: unknown key '" + key + "'");
    }
    auto need = [&](const char* key) -> const Json& {
        if (!doc.contains(key)) throw InvalidDocument(std::string("report: missing key '") + key + "'");
        return doc.at(key);
    };
    if (need("schema_version") != 1) throw InvalidDocument("report: unsupported schema_version");
    try {
        Report report;
        report.run = json::run_metadata_from_json(need("run"));
        const auto key = parse_group_key(need("group_by").get<std::string>());
        if (!key) throw InvalidDocument("report: unknown group_by");
        report.group_by = *key;
        for (const auto& f : need("findings")) report.run.findings.push_back(json::finding_from_json(f));

        std::map<std::string, const Finding*> by_id;
        for (const auto& f : report.run.findings) by_id[f.finding_id] = &f;
        for (const auto& g : need("groups")) {
            FindingGroup group{g.at("label").get<std::string>(), {}};
            for (const auto& id : g.at("finding_ids")) {
                const auto it = by_id.find(id.get<std::string>());
                if (it == by_id.end()) throw InvalidDocument("report: group refers to unknown finding " + id.dump());
                group.findings.push_back(*it->second);
            }
            report.groups.push_back(std::move(group));
        }
        const Json& totals = need("totals");
        report.totals.findings = totals.at("findings").get<std::size_t>();
        report.totals.by_checker = totals.at("by_checker").get<std::map<std::string, std::size_t>>();
        report.totals.by_workbook = totals.at("by_workbook").get<std::map<std::string, std::size_t>>();
        if (doc.contains("evaluation")) report.evaluation = json::evaluation_from_json(doc.at("evaluation"));
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidDocument(std::string("report: ") + e.what());
    }
}

void write_report(const Report& report, ReportFormat format, const std::string& path) {
    write_file_atomic(path, serialize_report(report, format));
}

}  // namespace sheetaudit
