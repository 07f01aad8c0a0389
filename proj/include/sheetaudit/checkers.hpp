#pragma once

#include "sheetaudit/policy.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace sheetaudit::checkers {

inline constexpr std::string_view kConstantsInFormulae = "constants-in-formulae";
inline constexpr std::string_view kUnprotectedFormulaCells = "unprotected-formula-cells";
inline constexpr std::string_view kReferenceDirection = "reference-direction";
inline constexpr std::string_view kBlankOnlyCells = "blank-only-cells";
inline constexpr std::string_view kFormulaConsistency = "formula-consistency";

/// Constants used in several formulas.
struct ConstantsOptions {
    std::int64_t min_uses = 2;
    std::vector<std::string> ignore_values;  ///< Compared by canonical decimal text.
    bool include_text_literals = false;

    static ConstantsOptions from(const ParamSet& params);
};
std::vector<Finding> check_constants_in_formulae(const AnalysisContext& context, const ConstantsOptions& options = {});

/// Formula cells without effective protection: locked AND (sheet protected
/// OR NOT require_sheet_protection).
struct ProtectionOptions {
    bool require_sheet_protection = true;

    static ProtectionOptions from(const ParamSet& params);
};
std::vector<Finding> check_unprotected_formula_cells(const AnalysisContext& context,
                                                     const ProtectionOptions& options = {});

/// Formulas referring to the right of or below their own cell. Ranges are
/// judged by their bottom-right corner.
struct DirectionOptions {
    bool check_cross_sheet = false;

    static DirectionOptions from(const ParamSet& params);
};
std::vector<Finding> check_reference_direction(const AnalysisContext& context, const DirectionOptions& options = {});

/// Text cells that contain only blanks.
struct BlankOptions {
    bool include_all_whitespace = false;

    static BlankOptions from(const ParamSet& params);
};
std::vector<Finding> check_blank_only_cells(const AnalysisContext& context, const BlankOptions& options = {});

/// True when `text` is non-empty and made of U+0020 only, or of any Unicode
/// white space when `any_whitespace` is set. Invalid UTF-8 is never blank.
bool is_blank_text(std::string_view text, bool any_whitespace);

/// Deviating formulas inside runs of adjacent formula cells.
struct ConsistencyOptions {
    std::int64_t min_run = 3;

    static ConsistencyOptions from(const ParamSet& params);
};
std::vector<Finding> check_formula_consistency(const AnalysisContext& context,
                                               const ConsistencyOptions& options = {});

std::unique_ptr<RuleChecker> make_constants_checker();
std::unique_ptr<RuleChecker> make_protection_checker();
std::unique_ptr<RuleChecker> make_direction_checker();
std::unique_ptr<RuleChecker> make_blank_checker();
std::unique_ptr<RuleChecker> make_consistency_checker();

void register_builtin_checkers(CheckerRegistry& registry);

}  // namespace sheetaudit::checkers
