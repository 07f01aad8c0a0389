#include "sheetaudit/policy.hpp"

#include "fingerprint.hpp"
#include "sheetaudit/workbook_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <set>
#include <thread>
#include <tuple>

namespace sheetaudit {

// ---------------------------------------------------------------------------
// Parameters

std::string_view to_string(ParamType type) {
    switch (type) {
        case ParamType::integer: return "int";
        case ParamType::decimal: return "decimal";
        case ParamType::boolean: return "bool";
        case ParamType::string: return "string";
        case ParamType::string_list: return "string-list";
    }
    return "?";
}

ParamType type_of(const ParamValue& value) {
    switch (value.index()) {
        case 0: return ParamType::integer;
        case 1: return ParamType::decimal;
        case 2: return ParamType::boolean;
        case 3: return ParamType::string;
        default: return ParamType::string_list;
    }
}

bool accepts(ParamType type, const ParamValue& value) {
    const ParamType actual = type_of(value);
    return actual == type || (type == ParamType::decimal && actual == ParamType::integer);
}

const ParamSpec* CheckerDescriptor::param(std::string_view name) const {
    for (const auto& spec : param_schema) {
        if (spec.name == name) return &spec;
    }
    return nullptr;
}

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::info: return "info";
        case Severity::warning: return "warning";
        case Severity::error: return "error";
    }
    return "?";
}

std::optional<Severity> parse_severity(std::string_view text) {
    if (text == "info") return Severity::info;
    if (text == "warning") return Severity::warning;
    if (text == "error") return Severity::error;
    return std::nullopt;
}

CheckerConfig* Scenario::find(std::string_view checker_id) {
    for (auto& c : checkers) {
        if (c.checker_id == checker_id) return &c;
    }
    return nullptr;
}

const CheckerConfig* Scenario::find(std::string_view checker_id) const {
    return const_cast<Scenario*>(this)->find(checker_id);
}

ParamSet::ParamSet(const CheckerDescriptor& descriptor, const std::map<std::string, ParamValue>& overrides) {
    for (const auto& spec : descriptor.param_schema) {
        auto it = overrides.find(spec.name);
        ParamValue value = it != overrides.end() && accepts(spec.type, it->second) ? it->second : spec.default_value;
        if (spec.type == ParamType::decimal) {
            if (const auto* i = std::get_if<std::int64_t>(&value)) value = static_cast<double>(*i);
        }
        values_.emplace(spec.name, std::move(value));
    }
}

const ParamValue& ParamSet::at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw Error("unknown checker parameter '" + name + "'");
    return it->second;
}

std::int64_t ParamSet::integer(const std::string& name) const { return std::get<std::int64_t>(at(name)); }
double ParamSet::decimal(const std::string& name) const { return std::get<double>(at(name)); }
bool ParamSet::boolean(const std::string& name) const { return std::get<bool>(at(name)); }
const std::string& ParamSet::string(const std::string& name) const { return std::get<std::string>(at(name)); }
const std::vector<std::string>& ParamSet::string_list(const std::string& name) const {
    return std::get<std::vector<std::string>>(at(name));
}

// ---------------------------------------------------------------------------
// Findings

std::string location_label(const FindingLocation& location) {
    struct {
        std::string operator()(const WorkbookLocation&) const { return "(workbook)"; }
        std::string operator()(const SheetLocation& s) const { return s.sheet_name; }
        std::string operator()(const CellLocation& c) const {
            return quote_sheet_name(c.sheet_name) + "!" + format_a1(c.cell.column, c.cell.row);
        }
        std::string operator()(const RangeLocation& r) const {
            return quote_sheet_name(r.sheet_name) + "!" + format_a1(r.first.column, r.first.row) + ":" +
                   format_a1(r.last.column, r.last.row);
        }
    } visitor;
    return std::visit(visitor, location);
}

std::optional<int> location_sheet(const FindingLocation& location) {
    struct {
        std::optional<int> operator()(const WorkbookLocation&) const { return std::nullopt; }
        std::optional<int> operator()(const SheetLocation& s) const { return s.sheet_index; }
        std::optional<int> operator()(const CellLocation& c) const { return c.cell.sheet_index; }
        std::optional<int> operator()(const RangeLocation& r) const { return r.first.sheet_index; }
    } visitor;
    return std::visit(visitor, location);
}

std::string compute_finding_id(const Finding& finding) {
    detail::Fingerprint fp;
    fp.add(finding.checker_id).add(finding.workbook_id).add(location_label(finding.location)).add(finding.message);
    return "f-" + fp.hex();
}

std::vector<std::string> AnalysisRun::workbook_ids() const {
    std::vector<std::string> ids;
    for (const auto& w : workbooks) ids.push_back(w.id);
    return ids;
}

const WorkbookSummary* AnalysisRun::workbook(std::string_view id) const {
    for (const auto& w : workbooks) {
        if (w.id == id) return &w;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Analysis context

AnalysisContext::AnalysisContext(const Workbook& workbook) : workbook_(&workbook) {
    for (const auto& sheet : workbook.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (!cell.is_formula()) continue;
            FormulaEntry entry;
            entry.cell = &cell;
            try {
                entry.ast = parse_formula(cell.formula().source);
            } catch (const FormulaError& e) {
                entry.skip_reason = e.what();
            }
            index_.emplace(cell.address, formulas_.size());
            formulas_.push_back(std::move(entry));
        }
    }
}

const FormulaEntry* AnalysisContext::formula_at(const CellAddress& address) const {
    auto it = index_.find(address);
    return it == index_.end() ? nullptr : &formulas_[it->second];
}

FindingLocation AnalysisContext::cell_location(const CellAddress& address) const {
    return CellLocation{address, workbook_->sheets.at(address.sheet_index).name};
}

FindingLocation AnalysisContext::range_location(const CellAddress& first, const CellAddress& last) const {
    return RangeLocation{first, last, workbook_->sheets.at(first.sheet_index).name};
}

// ---------------------------------------------------------------------------
// Registry

void CheckerRegistry::add(std::unique_ptr<RuleChecker> checker) {
    const CheckerDescriptor& d = checker->descriptor();
    if (d.id.empty()) throw Error("checker id must not be empty");
    std::set<std::string> names;
    for (const auto& spec : d.param_schema) {
        if (!names.insert(spec.name).second) throw Error("checker '" + d.id + "' declares '" + spec.name + "' twice");
        if (type_of(spec.default_value) != spec.type)
            throw Error("checker '" + d.id + "': default of '" + spec.name + "' does not match its type");
    }
    const std::string id = d.id;
    if (!checkers_.emplace(id, std::move(checker)).second) throw Error("duplicate checker id '" + id + "'");
}

const RuleChecker* CheckerRegistry::find(std::string_view id) const {
    auto it = checkers_.find(id);
    return it == checkers_.end() ? nullptr : it->second.get();
}

std::vector<CheckerDescriptor> CheckerRegistry::descriptors() const {
    std::vector<CheckerDescriptor> out;
    for (const auto& [id, checker] : checkers_) out.push_back(checker->descriptor());
    return out;
}

std::vector<CheckerDescriptor> list_checkers(const CheckerRegistry& registry) { return registry.descriptors(); }

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ValidationIssue::Kind kind) {
    switch (kind) {
        case ValidationIssue::Kind::empty_name: return "EmptyName";
        case ValidationIssue::Kind::unknown_checker: return "UnknownChecker";
        case ValidationIssue::Kind::duplicate_checker: return "DuplicateChecker";
        case ValidationIssue::Kind::unknown_param: return "UnknownParam";
        case ValidationIssue::Kind::param_type_mismatch: return "ParamTypeMismatch";
        case ValidationIssue::Kind::param_out_of_range: return "ParamOutOfRange";
    }
    return "?";
}

std::vector<ValidationIssue> validate_scenario(const Scenario& scenario, const CheckerRegistry& registry) {
    using Kind = ValidationIssue::Kind;
    std::vector<ValidationIssue> issues;
    if (scenario.name.empty()) issues.push_back({Kind::empty_name, "", "", "scenario name must not be empty"});

    std::set<std::string> seen;
    for (const auto& config : scenario.checkers) {
        if (!seen.insert(config.checker_id).second) {
            issues.push_back({Kind::duplicate_checker, config.checker_id, "",
                              "checker '" + config.checker_id + "' is configured more than once"});
            continue;
        }
        const RuleChecker* checker = registry.find(config.checker_id);
        if (!checker) {
            issues.push_back({Kind::unknown_checker, config.checker_id, "",
                              "no checker with id '" + config.checker_id + "'"});
            continue;
        }
        const CheckerDescriptor& d = checker->descriptor();
        for (const auto& [name, value] : config.params) {
            const ParamSpec* spec = d.param(name);
            if (!spec) {
                issues.push_back({Kind::unknown_param, config.checker_id, name,
                                  "checker '" + config.checker_id + "' has no parameter '" + name + "'"});
            } else if (!accepts(spec->type, value)) {
                issues.push_back({Kind::param_type_mismatch, config.checker_id, name,
                                  "parameter '" + name + "' expects " + std::string(to_string(spec->type)) +
                                      ", got " + std::string(to_string(type_of(value)))});
            } else if (spec->minimum && std::get<std::int64_t>(value) < *spec->minimum) {
                issues.push_back({Kind::param_out_of_range, config.checker_id, name,
                                  "parameter '" + name + "' must be at least " + std::to_string(*spec->minimum)});
            }
        }
    }
    return issues;
}

namespace {

std::string describe_issues(const std::vector<ValidationIssue>& issues) {
    std::string text = "invalid scenario:";
    for (const auto& issue : issues) text += " " + issue.message + ";";
    return text;
}

}  // namespace

InvalidScenario::InvalidScenario(std::vector<ValidationIssue> issues)
    : Error(describe_issues(issues)), issues_(std::move(issues)) {}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

auto location_key(const FindingLocation& location) {
    struct {
        std::tuple<int, int, int, int, int, int> operator()(const WorkbookLocation&) const { return {-1, -1, -1, 0, 0, 0}; }
        std::tuple<int, int, int, int, int, int> operator()(const SheetLocation& s) const {
            return {s.sheet_index, -1, -1, 1, 0, 0};
        }
        std::tuple<int, int, int, int, int, int> operator()(const CellLocation& c) const {
            return {c.cell.sheet_index, c.cell.row, c.cell.column, 2, 0, 0};
        }
        std::tuple<int, int, int, int, int, int> operator()(const RangeLocation& r) const {
            return {r.first.sheet_index, r.first.row, r.first.column, 3, r.last.row, r.last.column};
        }
    } visitor;
    return std::visit(visitor, location);
}

bool finding_order(const Finding& a, const Finding& b) {
    return std::forward_as_tuple(a.workbook_id, a.checker_id) < std::forward_as_tuple(b.workbook_id, b.checker_id) ||
           (std::forward_as_tuple(a.workbook_id, a.checker_id) == std::forward_as_tuple(b.workbook_id, b.checker_id) &&
            std::make_tuple(location_key(a.location), std::cref(a.message), std::cref(a.related_cells)) <
                std::make_tuple(location_key(b.location), std::cref(b.message), std::cref(b.related_cells)));
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
        });
    }
}

void fingerprint_param(detail::Fingerprint& fp, const ParamValue& value) {
    struct {
        detail::Fingerprint& fp;
        void operator()(std::int64_t v) const { fp.add("i").add(std::to_string(v)); }
        void operator()(double v) const { fp.add("d").add(canonical_number(v)); }
        void operator()(bool v) const { fp.add("b").add(v ? "1" : "0"); }
        void operator()(const std::string& v) const { fp.add("s").add(v); }
        void operator()(const std::vector<std::string>& v) const {
            fp.add("l").add(std::to_string(v.size()));
            for (const auto& s : v) fp.add(s);
        }
    } visitor{fp};
    std::visit(visitor, value);
}

}  // namespace

std::string compute_run_id(const Scenario& scenario, std::span<const Workbook> workbooks) {
    detail::Fingerprint fp;
    fp.add(scenario.name).add(scenario.description);
    for (const auto& c : scenario.checkers) {
        fp.add(c.checker_id).add(c.enabled ? "on" : "off").add(to_string(c.severity));
        for (const auto& [name, value] : c.params) {
            fp.add(name);
            fingerprint_param(fp, value);
        }
    }
    for (const auto& w : workbooks) fp.add(write_fixture(w));
    return "run-" + fp.hex();
}

AnalysisRun run_scenario(const Scenario& scenario, std::span<const Workbook> workbooks,
                         const CheckerRegistry& registry, const RunOptions& options) {
    if (auto issues = validate_scenario(scenario, registry); !issues.empty()) throw InvalidScenario(std::move(issues));
    std::set<std::string> ids;
    for (const auto& w : workbooks) {
        if (!ids.insert(w.id).second) throw Error("workbook id '" + w.id + "' appears more than once in the run");
    }

    AnalysisRun run;
    run.started = utc_now();
    run.scenario = scenario;
    run.run_id = compute_run_id(scenario, workbooks);
    for (const auto& w : workbooks) {
        WorkbookSummary summary{w.id, {}};
        for (const auto& s : w.sheets) summary.sheet_names.push_back(s.name);
        run.workbooks.push_back(std::move(summary));
    }

    std::vector<const CheckerConfig*> enabled;
    for (const auto& c : scenario.checkers) {
        if (c.enabled) enabled.push_back(&c);
    }

    std::vector<std::unique_ptr<AnalysisContext>> contexts(workbooks.size());
    parallel_for(workbooks.size(), options.threads,
                 [&](std::size_t i) { contexts[i] = std::make_unique<AnalysisContext>(workbooks[i]); });
    for (std::size_t i = 0; i < workbooks.size(); ++i) {
        for (const auto& entry : contexts[i]->formulas()) {
            if (!entry.ast) run.skipped_formulas.push_back({workbooks[i].id, entry.address(), entry.skip_reason});
        }
    }

    struct TaskResult {
        std::vector<Finding> findings;
        std::optional<std::string> failure;
    };
    const std::size_t task_count = workbooks.size() * enabled.size();
    std::vector<TaskResult> results(task_count);
    parallel_for(task_count, options.threads, [&](std::size_t t) {
        const std::size_t w = t / enabled.size();
        const CheckerConfig& config = *enabled[t % enabled.size()];
        const RuleChecker& checker = *registry.find(config.checker_id);
        try {
            const ParamSet params(checker.descriptor(), config.params);
            results[t].findings = checker.check(*contexts[w], params);
        } catch (const std::exception& e) {
            results[t].failure = e.what();
        } catch (...) {
            results[t].failure = "unknown exception";
        }
    });

    for (std::size_t t = 0; t < task_count; ++t) {
        const std::string& workbook_id = workbooks[t / enabled.size()].id;
        const CheckerConfig& config = *enabled[t % enabled.size()];
        if (results[t].failure) {
            run.checker_failures.push_back({config.checker_id, workbook_id, *results[t].failure});
            continue;
        }
        for (auto& finding : results[t].findings) {
            finding.checker_id = config.checker_id;
            finding.workbook_id = workbook_id;
            finding.severity = config.severity;
            finding.finding_id = compute_finding_id(finding);
            run.findings.push_back(std::move(finding));
        }
    }
    std::stable_sort(run.findings.begin(), run.findings.end(), finding_order);
    run.finished = utc_now();
    return run;
}

}  // namespace sheetaudit
