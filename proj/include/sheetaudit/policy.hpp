#pragma once

#include "sheetaudit/error.hpp"
#include "sheetaudit/formula.hpp"
#include "sheetaudit/workbook.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sheetaudit {

// ---------------------------------------------------------------------------
// Checker parameters and scenarios

enum class ParamType { integer, decimal, boolean, string, string_list };

using ParamValue = std::variant<std::int64_t, double, bool, std::string, std::vector<std::string>>;

std::string_view to_string(ParamType type);
/// Type a value carries on its own (an integer reads as `integer`).
ParamType type_of(const ParamValue& value);
/// Whether `value` is acceptable for a parameter of `type`; integers are
/// accepted where decimals are expected.
bool accepts(ParamType type, const ParamValue& value);

struct ParamSpec {
    std::string name;
    ParamType type;
    ParamValue default_value;
    std::string description;
    std::optional<std::int64_t> minimum;  ///< Lower bound for integer parameters.
};

struct CheckerDescriptor {
    std::string id;
    std::string display_name;
    std::string summary;
    std::vector<ParamSpec> param_schema;

    const ParamSpec* param(std::string_view name) const;
};

enum class Severity { info, warning, error };

std::string_view to_string(Severity severity);
std::optional<Severity> parse_severity(std::string_view text);

struct CheckerConfig {
    std::string checker_id;
    bool enabled = true;
    Severity severity = Severity::warning;
    std::map<std::string, ParamValue> params;

    friend bool operator==(const CheckerConfig&, const CheckerConfig&) = default;
};

/// A named policy: a catalogue of individually configured checkers.
struct Scenario {
    std::string name;
    std::string description;
    std::vector<CheckerConfig> checkers;

    CheckerConfig* find(std::string_view checker_id);
    const CheckerConfig* find(std::string_view checker_id) const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parameter values of one checker with schema defaults filled in.
class ParamSet {
public:
    ParamSet(const CheckerDescriptor& descriptor, const std::map<std::string, ParamValue>& overrides);

    std::int64_t integer(const std::string& name) const;
    double decimal(const std::string& name) const;
    bool boolean(const std::string& name) const;
    const std::string& string(const std::string& name) const;
    const std::vector<std::string>& string_list(const std::string& name) const;

private:
    const ParamValue& at(const std::string& name) const;
    std::map<std::string, ParamValue> values_;
};

// ---------------------------------------------------------------------------
// Findings and runs

struct CellLocation {
    CellAddress cell;
    std::string sheet_name;
    friend auto operator<=>(const CellLocation&, const CellLocation&) = default;
};

struct RangeLocation {
    CellAddress first;  ///< Top-left.
    CellAddress last;   ///< Bottom-right, same sheet.
    std::string sheet_name;
    friend auto operator<=>(const RangeLocation&, const RangeLocation&) = default;
};

struct SheetLocation {
    int sheet_index = 0;
    std::string sheet_name;
    friend auto operator<=>(const SheetLocation&, const SheetLocation&) = default;
};

struct WorkbookLocation {
    friend auto operator<=>(const WorkbookLocation&, const WorkbookLocation&) = default;
};

using FindingLocation = std::variant<WorkbookLocation, SheetLocation, CellLocation, RangeLocation>;

/// "Sheet1!B4", "Sheet1!B2:B5", "Sheet1" or "(workbook)".
std::string location_label(const FindingLocation& location);
/// Sheet index of the location, if it has one.
std::optional<int> location_sheet(const FindingLocation& location);

struct Finding {
    std::string finding_id;
    std::string checker_id;
    std::string workbook_id;
    FindingLocation location;
    Severity severity = Severity::warning;
    std::string message;      ///< What was found.
    std::string explanation;  ///< Why it can lead to problems.
    std::string suggestion;   ///< How to remedy it.
    std::vector<CellAddress> related_cells;

    friend bool operator==(const Finding&, const Finding&) = default;
};

/// Stable content hash of (checker, workbook, location, message).
std::string compute_finding_id(const Finding& finding);

struct SkippedFormula {
    std::string workbook_id;
    CellAddress cell;
    std::string reason;
    friend bool operator==(const SkippedFormula&, const SkippedFormula&) = default;
};

/// A checker that threw while analysing one workbook.
struct CheckerFailure {
    std::string checker_id;
    std::string workbook_id;
    std::string detail;
    friend bool operator==(const CheckerFailure&, const CheckerFailure&) = default;
};

struct WorkbookSummary {
    std::string id;
    std::vector<std::string> sheet_names;
    friend bool operator==(const WorkbookSummary&, const WorkbookSummary&) = default;
};

struct AnalysisRun {
    std::string run_id;
    Scenario scenario;  ///< Frozen copy.
    std::vector<WorkbookSummary> workbooks;
    std::vector<Finding> findings;
    std::vector<SkippedFormula> skipped_formulas;
    std::vector<CheckerFailure> checker_failures;
    std::string started;   ///< ISO-8601 UTC.
    std::string finished;

    std::vector<std::string> workbook_ids() const;
    const WorkbookSummary* workbook(std::string_view id) const;

    friend bool operator==(const AnalysisRun&, const AnalysisRun&) = default;
};

// ---------------------------------------------------------------------------
// Checker plugin interface

struct FormulaEntry {
    const Cell* cell = nullptr;
    std::optional<FormulaAst> ast;  ///< Empty when the parser rejected the formula.
    std::string skip_reason;

    const CellAddress& address() const { return cell->address; }
};

/// A workbook with every formula parsed once, shared by all checkers.
class AnalysisContext {
public:
    explicit AnalysisContext(const Workbook& workbook);

    const Workbook& workbook() const { return *workbook_; }
    /// Formula cells ordered by sheet, row, column.
    const std::vector<FormulaEntry>& formulas() const { return formulas_; }
    const FormulaEntry* formula_at(const CellAddress& address) const;
    /// Finding skeleton with workbook and sheet names filled in.
    FindingLocation cell_location(const CellAddress& address) const;
    FindingLocation range_location(const CellAddress& first, const CellAddress& last) const;

private:
    const Workbook* workbook_;
    std::vector<FormulaEntry> formulas_;
    std::map<CellAddress, std::size_t> index_;
};

class RuleChecker {
public:
    virtual ~RuleChecker() = default;
    virtual const CheckerDescriptor& descriptor() const = 0;
    /// Must be a pure function of its inputs.
    virtual std::vector<Finding> check(const AnalysisContext& context, const ParamSet& params) const = 0;
};

class CheckerRegistry {
public:
    /// Throws Error on a duplicate id or a default that does not match its type.
    void add(std::unique_ptr<RuleChecker> checker);
    const RuleChecker* find(std::string_view id) const;
    /// Sorted by id.
    std::vector<CheckerDescriptor> descriptors() const;

private:
    std::map<std::string, std::unique_ptr<RuleChecker>, std::less<>> checkers_;
};

/// Registry with the five built-in checkers; immutable.
const CheckerRegistry& builtin_registry();

std::vector<CheckerDescriptor> list_checkers(const CheckerRegistry& registry = builtin_registry());

// ---------------------------------------------------------------------------
// Validation and execution

struct ValidationIssue {
    enum class Kind { empty_name, unknown_checker, duplicate_checker, unknown_param, param_type_mismatch, param_out_of_range };
    Kind kind;
    std::string checker_id;
    std::string param;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

std::string_view to_string(ValidationIssue::Kind kind);

std::vector<ValidationIssue> validate_scenario(const Scenario& scenario,
                                               const CheckerRegistry& registry = builtin_registry());

class InvalidScenario : public Error {
public:
    explicit InvalidScenario(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

struct RunOptions {
    unsigned threads = 0;  ///< 0 picks the hardware concurrency.
};

/// Runs every enabled checker over every workbook. Findings are sorted by
/// workbook id, checker id and location. A checker that throws is recorded
/// in checker_failures and does not affect the others.
///
/// Throws InvalidScenario, or Error when workbook ids are not unique.
AnalysisRun run_scenario(const Scenario& scenario, std::span<const Workbook> workbooks,
                         const CheckerRegistry& registry = builtin_registry(), const RunOptions& options = {});

/// Deterministic id derived from the scenario and the workbook contents.
std::string compute_run_id(const Scenario& scenario, std::span<const Workbook> workbooks);

}  // namespace sheetaudit
