#pragma once

#include "sheetaudit/checkers.hpp"

#include <functional>

namespace sheetaudit::checkers::detail {

/// Adapts a typed checking function to the RuleChecker interface.
template <class Options>
class FunctionChecker final : public RuleChecker {
public:
    using Fn = std::vector<Finding> (*)(const AnalysisContext&, const Options&);

    FunctionChecker(CheckerDescriptor descriptor, Fn fn) : descriptor_(std::move(descriptor)), fn_(fn) {}

    const CheckerDescriptor& descriptor() const override { return descriptor_; }

    std::vector<Finding> check(const AnalysisContext& context, const ParamSet& params) const override {
        return fn_(context, Options::from(params));
    }

private:
    CheckerDescriptor descriptor_;
    Fn fn_;
};

inline Finding make_finding(std::string_view checker_id, const AnalysisContext& context, FindingLocation location,
                            std::string message, std::string explanation, std::string suggestion,
                            std::vector<CellAddress> related = {}) {
    Finding f;
    f.checker_id = std::string(checker_id);
    f.workbook_id = context.workbook().id;
    f.location = std::move(location);
    f.message = std::move(message);
    f.explanation = std::move(explanation);
    f.suggestion = std::move(suggestion);
    f.related_cells = std::move(related);
    f.finding_id = compute_finding_id(f);
    return f;
}

inline std::string cell_label(const AnalysisContext& context, const CellAddress& address) {
    return location_label(context.cell_location(address));
}

}  // namespace sheetaudit::checkers::detail
