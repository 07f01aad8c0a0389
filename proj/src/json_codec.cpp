#include "sheetaudit/json_codec.hpp"

#include "sheetaudit/error.hpp"

#include <algorithm>
#include <initializer_list>

namespace sheetaudit::json {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    throw InvalidDocument(where + ": " + what);
}

/// Object accessor that rejects keys outside the allowed set.
class Fields {
public:
    Fields(const Json& doc, std::string where, std::initializer_list<const char*> allowed)
        : doc_(doc), where_(std::move(where)) {
        if (!doc.is_object()) invalid(where_, "expected an object");
        for (const auto& [key, value] : doc.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                invalid(where_, "unknown key '" + key + "'");
        }
    }

    bool has(const char* key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

    const Json& at(const char* key) const {
        if (!doc_.contains(key)) invalid(where_, "missing key '" + std::string(key) + "'");
        return doc_.at(key);
    }

    std::string string(const char* key) const {
        const Json& v = at(key);
        if (!v.is_string()) invalid(where_, "'" + std::string(key) + "' must be a string");
        return v.get<std::string>();
    }
    std::string string_or(const char* key, std::string fallback) const {
        return has(key) ? string(key) : std::move(fallback);
    }
    bool boolean_or(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const Json& v = at(key);
        if (!v.is_boolean()) invalid(where_, "'" + std::string(key) + "' must be true or false");
        return v.get<bool>();
    }
    std::int64_t integer(const char* key) const {
        const Json& v = at(key);
        if (!v.is_number_integer()) invalid(where_, "'" + std::string(key) + "' must be an integer");
        return v.get<std::int64_t>();
    }
    double number(const char* key) const {
        const Json& v = at(key);
        if (!v.is_number()) invalid(where_, "'" + std::string(key) + "' must be a number");
        return v.get<double>();
    }
    const Json& array(const char* key) const {
        const Json& v = at(key);
        if (!v.is_array()) invalid(where_, "'" + std::string(key) + "' must be an array");
        return v;
    }
    std::vector<std::string> strings(const char* key) const {
        std::vector<std::string> out;
        for (const auto& item : array(key)) {
            if (!item.is_string()) invalid(where_, "'" + std::string(key) + "' must hold strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    }
    const std::string& where() const { return where_; }

private:
    const Json& doc_;
    std::string where_;
};

Severity severity_from(const Fields& f, const char* key) {
    const std::string text = f.string_or(key, "warning");
    const auto s = parse_severity(text);
    if (!s) invalid(f.where(), "unknown severity '" + text + "'");
    return *s;
}

std::string a1(const CellAddress& address) { return format_a1(address.column, address.row); }

CellAddress address_from(const Fields& f, const char* key, int sheet_index) {
    try {
        const A1Address a = parse_a1_address(f.string(key));
        return {sheet_index, a.column, a.row};
    } catch (const MalformedAddress& e) {
        invalid(f.where(), e.what());
    }
}

int sheet_index_from(const Fields& f) {
    const auto index = f.integer("sheet_index");
    if (index < 0) invalid(f.where(), "negative sheet_index");
    return static_cast<int>(index);
}

}  // namespace

Json parse(std::string_view text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        invalid(what, std::string("not valid JSON (") + e.what() + ")");
    }
}

// ---------------------------------------------------------------------------
// Parameters, descriptors, scenarios

Json param_to_json(const ParamValue& value) {
    return std::visit([](const auto& v) { return Json(v); }, value);
}

ParamValue param_from_json(const Json& value, const std::string& where) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_number_float()) return value.get<double>();
    if (value.is_string()) return value.get<std::string>();
    if (value.is_array()) {
        std::vector<std::string> list;
        for (const auto& item : value) {
            if (!item.is_string()) invalid(where, "lists may only contain strings");
            list.push_back(item.get<std::string>());
        }
        return list;
    }
    invalid(where, "unsupported parameter value " + value.dump());
}

Json to_json(const CheckerDescriptor& d) {
    Json params = Json::array();
    for (const auto& p : d.param_schema) {
        Json entry{{"name", p.name},
                   {"type", to_string(p.type)},
                   {"default", param_to_json(p.default_value)},
                   {"description", p.description}};
        if (p.minimum) entry["minimum"] = *p.minimum;
        params.push_back(std::move(entry));
    }
    return Json{{"id", d.id}, {"display_name", d.display_name}, {"summary", d.summary}, {"params", std::move(params)}};
}

Json to_json(const std::vector<ValidationIssue>& issues) {
    Json out = Json::array();
    for (const auto& i : issues) {
        std::string field = "name";
        if (!i.checker_id.empty()) field = "checkers." + i.checker_id;
        if (!i.param.empty()) field += ".params." + i.param;
        out.push_back(Json{{"kind", to_string(i.kind)},
                           {"field", field},
                           {"checker_id", i.checker_id},
                           {"param", i.param},
                           {"message", i.message}});
    }
    return out;
}

Json to_json(const Scenario& s) {
    Json checkers = Json::array();
    for (const auto& c : s.checkers) {
        Json params = Json::object();
        for (const auto& [name, value] : c.params) params[name] = param_to_json(value);
        checkers.push_back(Json{{"id", c.checker_id},
                                {"enabled", c.enabled},
                                {"severity", to_string(c.severity)},
                                {"params", std::move(params)}});
    }
    return Json{{"name", s.name}, {"description", s.description}, {"checkers", std::move(checkers)}};
}

Scenario scenario_from_json(const Json& doc) {
    const Fields f(doc, "scenario", {"name", "description", "checkers"});
    Scenario s;
    s.name = f.string("name");
    s.description = f.string_or("description", "");
    if (f.has("checkers")) {
        std::size_t i = 0;
        for (const auto& entry : f.array("checkers")) {
            const Fields c(entry, "scenario checkers[" + std::to_string(i++) + "]", {"id", "enabled", "severity", "params"});
            CheckerConfig config;
            config.checker_id = c.string("id");
            config.enabled = c.boolean_or("enabled", true);
            config.severity = severity_from(c, "severity");
            if (c.has("params")) {
                const Json& params = c.at("params");
                if (!params.is_object()) invalid(c.where(), "'params' must be an object");
                for (const auto& [name, value] : params.items())
                    config.params[name] = param_from_json(value, c.where() + " param '" + name + "'");
            }
            s.checkers.push_back(std::move(config));
        }
    }
    return s;
}

Scenario parse_scenario(std::string_view text) { return scenario_from_json(parse(text, "scenario")); }

std::string dump_scenario(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Findings and runs

Json to_json(const CellAddress& address) {
    return Json{{"sheet_index", address.sheet_index}, {"cell", a1(address)}};
}

CellAddress cell_address_from_json(const Json& doc) {
    const Fields f(doc, "cell address", {"sheet_index", "cell"});
    return address_from(f, "cell", sheet_index_from(f));
}

Json to_json(const FindingLocation& location) {
    struct {
        Json operator()(const WorkbookLocation&) const { return Json{{"kind", "workbook"}}; }
        Json operator()(const SheetLocation& s) const {
            return Json{{"kind", "sheet"}, {"sheet_index", s.sheet_index}, {"sheet", s.sheet_name}};
        }
        Json operator()(const CellLocation& c) const {
            return Json{{"kind", "cell"}, {"sheet_index", c.cell.sheet_index}, {"sheet", c.sheet_name}, {"cell", a1(c.cell)}};
        }
        Json operator()(const RangeLocation& r) const {
            return Json{{"kind", "range"},
                        {"sheet_index", r.first.sheet_index},
                        {"sheet", r.sheet_name},
                        {"first", a1(r.first)},
                        {"last", a1(r.last)}};
        }
    } visitor;
    return std::visit(visitor, location);
}

FindingLocation location_from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string())
        invalid("finding location", "missing 'kind'");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "workbook") {
        const Fields f(doc, "workbook location", {"kind"});
        return WorkbookLocation{};
    }
    if (kind == "sheet") {
        const Fields f(doc, "sheet location", {"kind", "sheet_index", "sheet"});
        return SheetLocation{sheet_index_from(f), f.string("sheet")};
    }
    if (kind == "cell") {
        const Fields f(doc, "cell location", {"kind", "sheet_index", "sheet", "cell"});
        return CellLocation{address_from(f, "cell", sheet_index_from(f)), f.string("sheet")};
    }
    if (kind == "range") {
        const Fields f(doc, "range location", {"kind", "sheet_index", "sheet", "first", "last"});
        const int sheet = sheet_index_from(f);
        return RangeLocation{address_from(f, "first", sheet), address_from(f, "last", sheet), f.string("sheet")};
    }
    invalid("finding location", "unknown kind '" + kind + "'");
}

Json to_json(const Finding& finding) {
    Json related = Json::array();
    for (const auto& c : finding.related_cells) related.push_back(to_json(c));
    return Json{{"finding_id", finding.finding_id},
                {"checker_id", finding.checker_id},
                {"workbook_id", finding.workbook_id},
                {"location", to_json(finding.location)},
                {"label", location_label(finding.location)},
                {"severity", to_string(finding.severity)},
                {"message", finding.message},
                {"explanation", finding.explanation},
                {"suggestion", finding.suggestion},
                {"related_cells", std::move(related)}};
}

Finding finding_from_json(const Json& doc) {
    const Fields f(doc, "finding",
                   {"finding_id", "checker_id", "workbook_id", "location", "label", "severity", "message", "explanation",
                    "suggestion", "related_cells"});
    Finding out;
    out.finding_id = f.string("finding_id");
    out.checker_id = f.string("checker_id");
    out.workbook_id = f.string("workbook_id");
    out.location = location_from_json(f.at("location"));
    out.severity = severity_from(f, "severity");
    out.message = f.string("message");
    out.explanation = f.string("explanation");
    out.suggestion = f.string("suggestion");
    for (const auto& c : f.array("related_cells")) out.related_cells.push_back(cell_address_from_json(c));
    return out;
}

Json run_metadata_to_json(const AnalysisRun& run) {
    Json workbooks = Json::array();
    for (const auto& w : run.workbooks) workbooks.push_back(Json{{"id", w.id}, {"sheets", w.sheet_names}});
    Json skipped = Json::array();
    for (const auto& s : run.skipped_formulas) {
        skipped.push_back(Json{{"workbook_id", s.workbook_id},
                               {"sheet_index", s.cell.sheet_index},
                               {"cell", a1(s.cell)},
                               {"reason", s.reason}});
    }
    Json failures = Json::array();
    for (const auto& c : run.checker_failures) {
        failures.push_back(Json{{"checker_id", c.checker_id}, {"workbook_id", c.workbook_id}, {"detail", c.detail}});
    }
    return Json{{"run_id", run.run_id},
                {"started", run.started},
                {"finished", run.finished},
                {"scenario", to_json(run.scenario)},
                {"workbooks", std::move(workbooks)},
                {"skipped_formulas", std::move(skipped)},
                {"checker_failures", std::move(failures)}};
}

AnalysisRun run_metadata_from_json(const Json& doc) {
    const Fields f(doc, "run",
                   {"run_id", "started", "finished", "scenario", "workbooks", "skipped_formulas", "checker_failures"});
    AnalysisRun run;
    run.run_id = f.string("run_id");
    run.started = f.string("started");
    run.finished = f.string("finished");
    run.scenario = scenario_from_json(f.at("scenario"));
    for (const auto& w : f.array("workbooks")) {
        const Fields wf(w, "run workbook", {"id", "sheets"});
        run.workbooks.push_back(WorkbookSummary{wf.string("id"), wf.strings("sheets")});
    }
    for (const auto& s : f.array("skipped_formulas")) {
        const Fields sf(s, "skipped formula", {"workbook_id", "sheet_index", "cell", "reason"});
        run.skipped_formulas.push_back(
            SkippedFormula{sf.string("workbook_id"), address_from(sf, "cell", sheet_index_from(sf)), sf.string("reason")});
    }
    for (const auto& c : f.array("checker_failures")) {
        const Fields cf(c, "checker failure", {"checker_id", "workbook_id", "detail"});
        run.checker_failures.push_back(
            CheckerFailure{cf.string("checker_id"), cf.string("workbook_id"), cf.string("detail")});
    }
    return run;
}

// ---------------------------------------------------------------------------
// Ratings and evaluation

Json to_json(const std::vector<ExpertRating>& ratings) {
    Json out = Json::array();
    for (const auto& r : ratings) {
        Json entry{{"workbook_id", r.workbook_id}, {"expert_id", r.expert_id}, {"rating", to_string(r.rating)}};
        if (r.error_cells) entry["error_cells"] = *r.error_cells;
        entry["notes"] = r.notes;
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<ExpertRating> ratings_from_json(const Json& doc) {
    if (!doc.is_array()) invalid("ratings", "expected a list of ratings");
    std::vector<ExpertRating> out;
    std::size_t i = 0;
    for (const auto& entry : doc) {
        const Fields f(entry, "ratings[" + std::to_string(i++) + "]",
                       {"workbook_id", "expert_id", "rating", "error_cells", "notes"});
        ExpertRating r;
        r.workbook_id = f.string("workbook_id");
        r.expert_id = f.string("expert_id");
        const std::string rating = f.string("rating");
        const auto parsed = parse_rating(rating);
        if (!parsed) invalid(f.where(), "rating must be \"good\" or \"poor\", got '" + rating + "'");
        r.rating = *parsed;
        if (f.has("error_cells")) r.error_cells = f.strings("error_cells");
        r.notes = f.string_or("notes", "");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ExpertRating> parse_ratings(std::string_view text) { return ratings_from_json(parse(text, "ratings")); }

Json to_json(const EvaluationResult& result) {
    Json metrics = Json::array();
    for (const auto& m : result.metrics) {
        Json undefined = Json::array();
        if (m.precision_undefined) undefined.push_back("precision");
        if (m.recall_undefined) undefined.push_back("recall");
        if (m.accuracy_undefined) undefined.push_back("accuracy");
        if (m.mcc_undefined) undefined.push_back("mcc");
        metrics.push_back(Json{{"checker_id", m.checker_id},
                               {"tp", m.tp},
                               {"fp", m.fp},
                               {"fn", m.fn},
                               {"tn", m.tn},
                               {"precision", m.precision},
                               {"recall", m.recall},
                               {"accuracy", m.accuracy},
                               {"mcc", m.mcc},
                               {"undefined", std::move(undefined)},
                               {"perfect", m.perfect}});
    }
    Json matches = Json::array();
    for (const auto& c : result.cell_matches) {
        matches.push_back(Json{{"checker_id", c.checker_id}, {"hits", c.hits}, {"misses", c.misses}, {"spurious", c.spurious}});
    }
    Json consensus = Json::array();
    for (const auto& c : result.consensus) {
        Json entry{{"workbook_id", c.workbook_id},
                   {"rating", c.rating ? std::string(to_string(*c.rating)) : std::string("undecided")},
                   {"good_votes", c.good_votes},
                   {"poor_votes", c.poor_votes}};
        if (c.error_cells) entry["error_cells"] = *c.error_cells;
        consensus.push_back(std::move(entry));
    }
    return Json{{"metrics", std::move(metrics)},
                {"ranking", result.ranking},
                {"cell_matches", std::move(matches)},
                {"consensus", std::move(consensus)},
                {"notes", result.notes}};
}

EvaluationResult evaluation_from_json(const Json& doc) {
    const Fields f(doc, "evaluation", {"metrics", "ranking", "cell_matches", "consensus", "notes"});
    EvaluationResult result;
    for (const auto& entry : f.array("metrics")) {
        const Fields m(entry, "metric",
                       {"checker_id", "tp", "fp", "fn", "tn", "precision", "recall", "accuracy", "mcc", "undefined", "perfect"});
        RuleMetrics r;
        r.checker_id = m.string("checker_id");
        r.tp = static_cast<int>(m.integer("tp"));
        r.fp = static_cast<int>(m.integer("fp"));
        r.fn = static_cast<int>(m.integer("fn"));
        r.tn = static_cast<int>(m.integer("tn"));
        r.precision = m.number("precision");
        r.recall = m.number("recall");
        r.accuracy = m.number("accuracy");
        r.mcc = m.number("mcc");
        for (const auto& name : m.strings("undefined")) {
            if (name == "precision") r.precision_undefined = true;
            else if (name == "recall") r.recall_undefined = true;
            else if (name == "accuracy") r.accuracy_undefined = true;
            else if (name == "mcc") r.mcc_undefined = true;
            else invalid(m.where(), "unknown ratio '" + name + "'");
        }
        r.perfect = m.boolean_or("perfect", false);
        result.metrics.push_back(std::move(r));
    }
    result.ranking = f.strings("ranking");
    for (const auto& entry : f.array("cell_matches")) {
        const Fields c(entry, "cell match", {"checker_id", "hits", "misses", "spurious"});
        result.cell_matches.push_back(CellMatchStats{c.string("checker_id"), static_cast<int>(c.integer("hits")),
                                                     static_cast<int>(c.integer("misses")),
                                                     static_cast<int>(c.integer("spurious"))});
    }
    for (const auto& entry : f.array("consensus")) {
        const Fields c(entry, "consensus", {"workbook_id", "rating", "good_votes", "poor_votes", "error_cells"});
        ConsensusRating r;
        r.workbook_id = c.string("workbook_id");
        const std::string rating = c.string("rating");
        if (rating != "undecided") {
            r.rating = parse_rating(rating);
            if (!r.rating) invalid(c.where(), "unknown rating '" + rating + "'");
        }
        r.good_votes = static_cast<int>(c.integer("good_votes"));
        r.poor_votes = static_cast<int>(c.integer("poor_votes"));
        if (c.has("error_cells")) r.error_cells = c.strings("error_cells");
        result.consensus.push_back(std::move(r));
    }
    result.notes = f.strings("notes");
    return result;
}

}  // namespace sheetaudit::json
