#include "checker_support.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace sheetaudit::checkers {

namespace {

// Text literals are keyed with a marker so that "1" never collides with 1.
constexpr char kTextKeyMarker = '\x01';

std::optional<double> read_decimal(const std::string& text) {
    double value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::string display(const std::string& key) {
    if (!key.empty() && key.front() == kTextKeyMarker) return "\"" + key.substr(1) + "\"";
    return key;
}

}  // namespace

ConstantsOptions ConstantsOptions::from(const ParamSet& params) {
    return ConstantsOptions{params.integer("min_uses"), params.string_list("ignore_values"),
                            params.boolean("include_text_literals")};
}

std::vector<Finding> check_constants_in_formulae(const AnalysisContext& context, const ConstantsOptions& options) {
    std::set<std::string> ignored;
    for (const auto& value : options.ignore_values) {
        if (auto number = read_decimal(value)) ignored.insert(canonical_number(*number));
        ignored.insert(kTextKeyMarker + value);
    }

    // Key -> formula cells using it, in first-use order; each cell counted once.
    std::map<std::string, std::vector<CellAddress>> uses;
    std::vector<std::string> key_order;
    for (const auto& entry : context.formulas()) {
        if (!entry.ast) continue;
        std::set<std::string> keys_in_cell;
        for (double c : extract_constants(*entry.ast)) keys_in_cell.insert(canonical_number(c));
        if (options.include_text_literals) {
            for (const auto& t : extract_text_literals(*entry.ast)) keys_in_cell.insert(kTextKeyMarker + t);
        }
        for (const auto& key : keys_in_cell) {
            auto [it, inserted] = uses.try_emplace(key);
            if (inserted) key_order.push_back(key);
            it->second.push_back(entry.address());
        }
    }

    std::vector<Finding> findings;
    for (const auto& key : key_order) {
        const auto& cells = uses[key];
        if (static_cast<std::int64_t>(cells.size()) < options.min_uses || ignored.count(key)) continue;
        const std::string shown = display(key);
        findings.push_back(detail::make_finding(
            kConstantsInFormulae, context, context.cell_location(cells.front()),
            "The constant " + shown + " is hardcoded in " + std::to_string(cells.size()) + " formula cell" +
                (cells.size() == 1 ? "" : "s"),
            "A value typed into several formulas has to be found and changed in every one of them when it "
            "changes; missing a single occurrence silently produces inconsistent results.",
            "Move " + shown + " into a dedicated, labelled input cell and reference that cell from each formula.",
            cells));
    }
    return findings;
}

std::unique_ptr<RuleChecker> make_constants_checker() {
    CheckerDescriptor d{
        std::string(kConstantsInFormulae),
        "Constants in formulae",
        "Reports hardcoded constants that are used in multiple formulae.",
        {
            {"min_uses", ParamType::integer, std::int64_t{2},
             "Number of distinct formula cells a constant must appear in before it is reported.", 1},
            {"ignore_values", ParamType::string_list, std::vector<std::string>{},
             "Constants that are never reported, e.g. \"1\" for percentage calculations.", std::nullopt},
            {"include_text_literals", ParamType::boolean, false, "Also report repeated text literals.", std::nullopt},
        }};
    return std::make_unique<detail::FunctionChecker<ConstantsOptions>>(std::move(d), &check_constants_in_formulae);
}

}  // namespace sheetaudit::checkers
