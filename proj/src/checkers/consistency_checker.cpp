#include "checker_support.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>

namespace sheetaudit::checkers {

namespace {

struct RunCell {
    CellAddress address;
    const std::string* normalized;
};

void judge_run(const AnalysisContext& context, const std::vector<RunCell>& run, bool is_row,
               std::vector<Finding>& findings) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& c : run) ++counts[*c.normalized];
    if (counts.size() < 2) return;

    // Strict majority wins; otherwise the first cell sets the pattern.
    const std::string* baseline = run.front().normalized;
    for (const auto& [text, count] : counts) {
        if (2 * count > run.size()) baseline = &text;
    }

    std::vector<CellAddress> extent;
    for (const auto& c : run) extent.push_back(c.address);
    const std::string extent_label = location_label(context.range_location(run.front().address, run.back().address));
    for (const auto& c : run) {
        if (*c.normalized == *baseline) continue;
        findings.push_back(detail::make_finding(
            kFormulaConsistency, context, context.cell_location(c.address),
            "Formula in " + detail::cell_label(context, c.address) + " differs from the other formulas in " +
                (is_row ? "row" : "column") + " run " + extent_label,
            "Adjacent formulas along a row or column are expected to compute the same thing relative to their "
            "position; a single deviating formula is a typical trace of an overwritten or mis-copied cell.",
            "Use one formula for the whole " + std::string(is_row ? "row" : "column") +
                ": copy the prevailing formula into this cell, or move the special case out of the run.",
            extent));
    }
}

}  // namespace

ConsistencyOptions ConsistencyOptions::from(const ParamSet& params) {
    return ConsistencyOptions{params.integer("min_run")};
}

std::vector<Finding> check_formula_consistency(const AnalysisContext& context, const ConsistencyOptions& options) {
    const std::size_t min_run = static_cast<std::size_t>(std::max<std::int64_t>(options.min_run, 2));

    // Parsed formulas only; skipped ones act as gaps.
    std::map<CellAddress, std::string> normalized;
    for (const auto& entry : context.formulas()) {
        if (entry.ast) normalized.emplace(entry.address(), normalize_r1c1(*entry.ast, entry.address()));
    }

    std::vector<Finding> findings;
    const int sheet_count = static_cast<int>(context.workbook().sheets.size());
    for (int sheet = 0; sheet < sheet_count; ++sheet) {
        std::vector<RunCell> row_major;
        for (const auto& [address, text] : normalized) {
            if (address.sheet_index == sheet) row_major.push_back({address, &text});
        }
        std::sort(row_major.begin(), row_major.end(), [](const RunCell& a, const RunCell& b) {
            return std::tie(a.address.row, a.address.column) < std::tie(b.address.row, b.address.column);
        });
        std::vector<RunCell> column_major = row_major;
        std::sort(column_major.begin(), column_major.end(), [](const RunCell& a, const RunCell& b) {
            return std::tie(a.address.column, a.address.row) < std::tie(b.address.column, b.address.row);
        });

        auto scan = [&](const std::vector<RunCell>& cells, bool is_row) {
            std::vector<RunCell> run;
            auto flush = [&] {
                if (run.size() >= min_run) judge_run(context, run, is_row, findings);
                run.clear();
            };
            for (const auto& c : cells) {
                if (!run.empty()) {
                    const CellAddress& prev = run.back().address;
                    const bool adjacent = is_row ? (c.address.row == prev.row && c.address.column == prev.column + 1)
                                                 : (c.address.column == prev.column && c.address.row == prev.row + 1);
                    if (!adjacent) flush();
                }
                run.push_back(c);
            }
            flush();
        };
        scan(row_major, true);
        scan(column_major, false);
    }
    return findings;
}

std::unique_ptr<RuleChecker> make_consistency_checker() {
    CheckerDescriptor d{
        std::string(kFormulaConsistency),
        "Formula consistency",
        "Reports formulae that break the pattern of their row or column (one formula per row or column).",
        {
            {"min_run", ParamType::integer, std::int64_t{3},
             "Minimum number of adjacent formula cells that form a run worth checking.", 2},
        }};
    return std::make_unique<detail::FunctionChecker<ConsistencyOptions>>(std::move(d), &check_formula_consistency);
}

}  // namespace sheetaudit::checkers
