#include "checker_support.hpp"

namespace sheetaudit::checkers {

ProtectionOptions ProtectionOptions::from(const ParamSet& params) {
    return ProtectionOptions{params.boolean("require_sheet_protection")};
}

std::vector<Finding> check_unprotected_formula_cells(const AnalysisContext& context, const ProtectionOptions& options) {
    const Workbook& workbook = context.workbook();
    std::vector<Finding> findings;
    for (const auto& entry : context.formulas()) {
        const Cell& cell = *entry.cell;
        const bool sheet_protected = workbook.sheets[cell.address.sheet_index].protection_enabled;
        if (cell.locked && (sheet_protected || !options.require_sheet_protection)) continue;

        std::string reason;
        if (!cell.locked) reason = "the cell is not locked";
        if (options.require_sheet_protection && !sheet_protected)
            reason += std::string(reason.empty() ? "" : " and ") + "sheet protection is off";
        findings.push_back(detail::make_finding(
            kUnprotectedFormulaCells, context, context.cell_location(cell.address),
            "Formula in " + detail::cell_label(context, cell.address) + " is not protected: " + reason,
            "An unprotected formula can be overwritten by a typed value without notice; later results then "
            "no longer follow from the inputs.",
            "Lock the cell and enable sheet protection so the formula cannot be overwritten accidentally."));
    }
    return findings;
}

std::unique_ptr<RuleChecker> make_protection_checker() {
    CheckerDescriptor d{
        std::string(kUnprotectedFormulaCells),
        "Unprotected formula cells",
        "Reports formulae in cells which do not have cell protection enabled.",
        {
            {"require_sheet_protection", ParamType::boolean, true,
             "Count a locked cell as protected only when its sheet's protection is switched on.", std::nullopt},
        }};
    return std::make_unique<detail::FunctionChecker<ProtectionOptions>>(std::move(d), &check_unprotected_formula_cells);
}

}  // namespace sheetaudit::checkers
