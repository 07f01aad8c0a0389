#include <doctest.h>

#include "sheetaudit/json_codec.hpp"
#include "sheetaudit/report.hpp"
#include "sheetaudit/workbook_io.hpp"
#include "support/fixture_gen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_map>

#include <unistd.h>

using namespace sheetaudit;

namespace {

Scenario mixed_severities() {
    const Severity cycle[] = {Severity::info, Severity::warning, Severity::error};
    Scenario s{"mixed", "", {}};
    int i = 0;
    for (const auto& d : list_checkers()) s.checkers.push_back(CheckerConfig{d.id, true, cycle[i++ % 3], {}});
    return s;
}

AnalysisRun random_run(std::mt19937& rng, int n_workbooks) {
    std::vector<Workbook> books;
    for (int i = 0; i < n_workbooks; ++i) {
        testsupport::FixtureOptions opts;
        opts.max_cells = 250;
        books.push_back(testsupport::random_fixture(rng, "wb" + std::to_string(i), opts).workbook);
    }
    return run_scenario(mixed_severities(), books, builtin_registry(), RunOptions{2});
}

Workbook planted() {
    return read_fixture(R"j({"id":"q1","sheets":[{"name":"Sales","protection_enabled":true,"cells":{
        "A2":{"value":10},"A3":{"value":20},"A4":{"value":30},
        "B2":{"formula":"=A2*2.5"},"B3":{"formula":"=A3*2.5"},"B4":{"formula":"=2.5+A4"},
        "C2":{"formula":"=A2+A3"},"D4":{"formula":"=SUM(A2:A4)","locked":false}}}]})j",
                        "q1");
}

Scenario quarterly() {
    return Scenario{"quarterly financial reports",
                    "",
                    {CheckerConfig{"constants-in-formulae", true, Severity::warning, {}},
                     CheckerConfig{"unprotected-formula-cells", true, Severity::error, {}}}};
}

std::string ascii_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Does the finding cover the given cell? Workbook-level findings cover none.
bool covers(const Finding& f, const std::string& sheet, int column, int row) {
    if (const auto* c = std::get_if<CellLocation>(&f.location))
        return ascii_lower(c->sheet_name) == ascii_lower(sheet) && c->cell.column == column && c->cell.row == row;
    if (const auto* r = std::get_if<RangeLocation>(&f.location))
        return ascii_lower(r->sheet_name) == ascii_lower(sheet) && r->first.column <= column &&
               column <= r->last.column && r->first.row <= row && row <= r->last.row;
    if (const auto* s = std::get_if<SheetLocation>(&f.location)) return ascii_lower(s->sheet_name) == ascii_lower(sheet);
    return false;
}

std::optional<int> sheet_of(const Finding& f) {
    if (const auto* c = std::get_if<CellLocation>(&f.location)) return c->cell.sheet_index;
    if (const auto* r = std::get_if<RangeLocation>(&f.location)) return r->first.sheet_index;
    if (const auto* s = std::get_if<SheetLocation>(&f.location)) return s->sheet_index;
    return std::nullopt;
}

// Linear predicate scan; the cell window is checked cell by cell.
std::vector<Finding> oracle_filter(const AnalysisRun& run, const FilterSpec& spec) {
    std::vector<Finding> out;
    for (const auto& f : run.findings) {
        bool keep = true;
        if (spec.workbook_ids) keep = keep && spec.workbook_ids->count(f.workbook_id);
        if (spec.checker_ids) keep = keep && spec.checker_ids->count(f.checker_id);
        if (spec.severities) keep = keep && spec.severities->count(f.severity);
        if (spec.sheet_indices) keep = keep && sheet_of(f) && spec.sheet_indices->count(*sheet_of(f));
        if (keep && spec.cells) {
            const auto& w = *spec.cells;
            const WorkbookSummary* book = run.workbook(f.workbook_id);
            bool any = false;
            for (const auto& name : book->sheet_names) {
                if (w.sheet_name && ascii_lower(*w.sheet_name) != ascii_lower(name)) continue;
                for (int c = w.first_column; c <= w.last_column && !any; ++c)
                    for (int r = w.first_row; r <= w.last_row && !any; ++r) any = covers(f, name, c, r);
            }
            keep = any;
        }
        if (keep) out.push_back(f);
    }
    return out;
}

template <class T>
std::optional<std::set<T>> random_subset(std::mt19937& rng, const std::vector<T>& pool) {
    if (rng() % 2) return std::nullopt;
    std::set<T> out;
    for (const auto& v : pool) {
        if (rng() % 2) out.insert(v);
    }
    return out;
}

FilterSpec random_filter(std::mt19937& rng, const AnalysisRun& run) {
    FilterSpec spec;
    std::vector<std::string> checkers;
    for (const auto& c : run.scenario.checkers) checkers.push_back(c.checker_id);
    checkers.push_back("no-such-checker");
    std::vector<std::string> books = run.workbook_ids();
    books.push_back("ghost");
    spec.checker_ids = random_subset(rng, checkers);
    spec.workbook_ids = random_subset(rng, books);
    spec.severities = random_subset(rng, std::vector<Severity>{Severity::info, Severity::warning, Severity::error});
    spec.sheet_indices = random_subset(rng, std::vector<int>{0, 1, 2, 3});
    if (rng() % 3 == 0) {
        CellWindow w;
        const int pick = static_cast<int>(rng() % 5);
        if (pick < 3) w.sheet_name = testsupport::fixture_sheet_names()[pick];
        if (pick == 3) w.sheet_name = "MAIN";
        w.first_column = static_cast<int>(rng() % 10);
        w.last_column = w.first_column + static_cast<int>(rng() % 8);
        w.first_row = static_cast<int>(rng() % 30);
        w.last_row = w.first_row + static_cast<int>(rng() % 15);
        spec.cells = w;
    }
    return spec;
}

std::vector<std::string> ids_of(const std::vector<Finding>& findings) {
    std::vector<std::string> ids;
    for (const auto& f : findings) ids.push_back(f.finding_id);
    return ids;
}

std::string label_for(const Finding& f, GroupKey key) {
    if (key == GroupKey::by_checker) return f.checker_id;
    if (key == GroupKey::by_workbook) return f.workbook_id;
    return location_label(f.location);
}

}  // namespace

TEST_CASE("parse_filter reads every dimension") {
    CHECK(parse_filter("") == FilterSpec{});
    const FilterSpec f = parse_filter("checker=a,b; severity=error;workbook=w1;sheet=0,2;cells='My Sheet'!C9:A1");
    CHECK(*f.checker_ids == std::set<std::string>{"a", "b"});
    CHECK(*f.severities == std::set<Severity>{Severity::error});
    CHECK(*f.workbook_ids == std::set<std::string>{"w1"});
    CHECK(*f.sheet_indices == std::set<int>{0, 2});
    CHECK(f.cells == CellWindow{"My Sheet", 0, 0, 2, 8});
    CHECK(parse_filter("cells=B2").cells == CellWindow{std::nullopt, 1, 1, 1, 1});

    CHECK_THROWS_AS(parse_filter("colour=red"), InvalidDocument);
    CHECK_THROWS_AS(parse_filter("severity=fatal"), InvalidDocument);
    CHECK_THROWS_AS(parse_filter("sheet=-1"), InvalidDocument);
    CHECK_THROWS_AS(parse_filter("checker"), InvalidDocument);
    CHECK_THROWS_AS(parse_filter("cells=Sheet1!ZZZZ"), InvalidDocument);
    CHECK_THROWS_AS(parse_filter("checker=a,,b"), InvalidDocument);
}

TEST_CASE("filter and group examples") {
    const Workbook book = planted();
    const AnalysisRun run = run_scenario(quarterly(), std::span(&book, 1));
    REQUIRE(run.findings.size() == 2);

    CHECK(filter_findings(run, {}) == run.findings);
    CHECK(filter_findings(run, parse_filter("checker=blank-only-cells")).empty());
    const auto errors = filter_findings(run, parse_filter("workbook=q1;severity=error"));
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].checker_id == "unprotected-formula-cells");
    CHECK(filter_findings(run, parse_filter("cells=sales!D1:D9")) == errors);

    CHECK(group_findings({}, GroupKey::by_checker).empty());

    Finding a = run.findings[0], b = run.findings[0], c = run.findings[1];
    b.finding_id = "f-other";
    b.location = CellLocation{{0, 1, 2}, "Sales"};
    const auto groups = group_findings({a, c, b}, GroupKey::by_checker);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].findings.size() == 2);
    CHECK(groups[1].findings.size() == 1);
    CHECK(ids_of(groups[0].findings) == std::vector<std::string>{a.finding_id, "f-other"});

    Finding whole = a;
    whole.location = WorkbookLocation{};
    const auto by_cell = group_findings({whole, c}, GroupKey::by_cell);
    REQUIRE(by_cell.size() == 2);
    CHECK(by_cell[0].label == "(workbook)");
    CHECK(by_cell[1].label == "Sales!D4");
}

TEST_CASE("filter matches a brute-force scan and grouping is a sorted partition") {
    std::mt19937 rng(4242);
    int nonempty = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const AnalysisRun run = random_run(rng, 3);
        for (int k = 0; k < 20; ++k) {
            const FilterSpec spec = random_filter(rng, run);
            const auto got = filter_findings(run, spec);
            CHECK(got == oracle_filter(run, spec));
            nonempty += !got.empty();
        }
        for (GroupKey key : {GroupKey::by_cell, GroupKey::by_checker, GroupKey::by_workbook}) {
            const auto groups = group_findings(run.findings, key);
            std::unordered_map<std::string, std::size_t> expected;
            for (const auto& f : run.findings) ++expected[label_for(f, key)];
            CHECK(groups.size() == expected.size());
            std::vector<std::string> concatenated;
            for (std::size_t i = 0; i < groups.size(); ++i) {
                if (i) CHECK(groups[i - 1].label < groups[i].label);
                CHECK(groups[i].findings.size() == expected[groups[i].label]);
                for (const auto& f : groups[i].findings) {
                    CHECK(label_for(f, key) == groups[i].label);
                    concatenated.push_back(f.finding_id);
                }
            }
            auto all = ids_of(run.findings);
            std::sort(all.begin(), all.end());
            std::sort(concatenated.begin(), concatenated.end());
            CHECK(concatenated == all);
        }
    }
    CHECK(nonempty > 100);
}

TEST_CASE("filtering commutes with grouping") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 15; ++trial) {
        const AnalysisRun run = random_run(rng, 2);
        for (int k = 0; k < 10; ++k) {
            const FilterSpec spec = random_filter(rng, run);
            for (GroupKey key : {GroupKey::by_cell, GroupKey::by_checker, GroupKey::by_workbook}) {
                const auto direct = group_findings(filter_findings(run, spec), key);
                std::vector<FindingGroup> per_group;
                for (const auto& g : group_findings(run.findings, key)) {
                    std::vector<Finding> kept;
                    for (const auto& f : g.findings) {
                        if (matches(f, spec)) kept.push_back(f);
                    }
                    if (!kept.empty()) per_group.push_back(FindingGroup{g.label, kept});
                }
                CHECK(direct == per_group);
            }
        }
    }
}

TEST_CASE("report totals and json round trip") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const AnalysisRun run = random_run(rng, 3);
        const FilterSpec spec = trial % 2 ? random_filter(rng, run) : FilterSpec{};
        const GroupKey key = static_cast<GroupKey>(trial % 3);
        const Report report = build_report(run, key, spec);
        CHECK(report.totals.findings == report.run.findings.size());
        std::size_t by_checker = 0, by_workbook = 0;
        for (const auto& [id, n] : report.totals.by_checker) by_checker += n;
        for (const auto& [id, n] : report.totals.by_workbook) by_workbook += n;
        CHECK(by_checker == report.totals.findings);
        CHECK(by_workbook == report.totals.findings);
        CHECK(report.totals.by_checker.size() == 5);
        CHECK(report.totals.by_workbook.size() == 3);

        const std::string text = serialize_report(report, ReportFormat::json);
        const Report back = deserialize_report(text);
        CHECK(back == report);
        CHECK(serialize_report(back, ReportFormat::json) == text);
    }
}

TEST_CASE("empty report has zero totals and documented keys") {
    const Workbook book = read_fixture(R"({"sheets":[{"name":"S","cells":{"A1":{"value":1}}}]})", "clean");
    const AnalysisRun run = run_scenario(quarterly(), std::span(&book, 1));
    const Report report = build_report(run);
    const auto doc = json::parse(serialize_report(report, ReportFormat::json), "report");
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"schema_version", "run", "group_by", "totals", "groups", "findings"});
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["findings"].empty());
    CHECK(doc["totals"]["findings"] == 0);
    CHECK(doc["totals"]["by_checker"]["constants-in-formulae"] == 0);
    CHECK(doc["totals"]["by_checker"]["unprotected-formula-cells"] == 0);
    CHECK(doc["totals"]["by_workbook"]["clean"] == 0);
}

TEST_CASE("text report shows all three texts per finding") {
    const Workbook book = planted();
    const AnalysisRun run = run_scenario(quarterly(), std::span(&book, 1));
    const std::string text = serialize_report(build_report(run, GroupKey::by_cell), ReportFormat::text);
    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
        return n;
    };
    CHECK(count("    Why: ") == 2);
    CHECK(count("    Fix: ") == 2);
    for (const auto& f : run.findings) {
        CHECK(text.find(f.message) != std::string::npos);
        CHECK(text.find(f.suggestion) != std::string::npos);
        CHECK_FALSE(f.suggestion.empty());
    }
    CHECK(text.find("Related: Sales!B2 Sales!B3 Sales!B4") != std::string::npos);
}

TEST_CASE("deserialize rejects broken reports and write_report is atomic") {
    CHECK_THROWS_AS(deserialize_report("{"), InvalidDocument);
    CHECK_THROWS_AS(deserialize_report("[]"), InvalidDocument);
    CHECK_THROWS_AS(deserialize_report(R"({"schema_version":2})"), InvalidDocument);
    CHECK_THROWS_AS(deserialize_report(R"({"schema_version":1,"surprise":0})"), InvalidDocument);

    const Workbook book = planted();
    const Report report = build_report(run_scenario(quarterly(), std::span(&book, 1)));
    const auto dir = std::filesystem::temp_directory_path() / ("sheetaudit-report-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.report.json").string();
    write_report(report, ReportFormat::json, path);
    std::ifstream in(path);
    const std::string stored((std::istreambuf_iterator<char>(in)), {});
    CHECK(deserialize_report(stored) == report);
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(write_report(report, ReportFormat::json, (dir / "missing" / "x.json").string()), IoFailure);
    std::filesystem::remove_all(dir);
}
