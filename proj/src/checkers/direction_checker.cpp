#include "checker_support.hpp"

#include <algorithm>

namespace sheetaudit::checkers {

DirectionOptions DirectionOptions::from(const ParamSet& params) {
    return DirectionOptions{params.boolean("check_cross_sheet")};
}

std::vector<Finding> check_reference_direction(const AnalysisContext& context, const DirectionOptions& options) {
    const Workbook& workbook = context.workbook();
    std::vector<Finding> findings;
    for (const auto& entry : context.formulas()) {
        if (!entry.ast) continue;
        const CellAddress& host = entry.address();
        std::vector<CellAddress> related;
        std::vector<std::string> offending;
        for (const RefTarget& target : extract_references(*entry.ast)) {
            const auto& sheet = reference_sheet(target);
            std::optional<int> target_sheet = host.sheet_index;
            if (sheet) target_sheet = workbook.sheet_index(*sheet);
            const bool same_sheet = target_sheet == host.sheet_index;
            if (!same_sheet && !options.check_cross_sheet) continue;

            const CellRef corner = reference_far_corner(target);
            if (corner.column <= host.column && corner.row <= host.row) continue;

            const std::string text = format_reference(target);
            if (std::find(offending.begin(), offending.end(), text) == offending.end()) offending.push_back(text);
            if (target_sheet) {
                const CellAddress address{*target_sheet, corner.column, corner.row};
                if (std::find(related.begin(), related.end(), address) == related.end()) related.push_back(address);
            }
        }
        if (offending.empty()) continue;

        std::string list;
        for (const auto& text : offending) list += (list.empty() ? "" : ", ") + text;
        findings.push_back(detail::make_finding(
            kReferenceDirection, context, context.cell_location(host),
            "Formula in " + detail::cell_label(context, host) + " refers to the right or below: " + list,
            "Calculations that flow left-to-right and top-to-bottom can be read and audited in order; references "
            "pointing right or down hide the data flow and invite circular or misplaced dependencies.",
            "Rearrange the sheet so inputs sit to the left of and above the formulas that use them.",
            std::move(related)));
    }
    return findings;
}

std::unique_ptr<RuleChecker> make_direction_checker() {
    CheckerDescriptor d{
        std::string(kReferenceDirection),
        "Reference direction",
        "Reports formulae which refer to the right or below.",
        {
            {"check_cross_sheet", ParamType::boolean, false,
             "Also judge references into other sheets, by their coordinates alone.", std::nullopt},
        }};
    return std::make_unique<detail::FunctionChecker<DirectionOptions>>(std::move(d), &check_reference_direction);
}

}  // namespace sheetaudit::checkers
