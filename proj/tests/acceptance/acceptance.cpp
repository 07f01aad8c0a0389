// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "sheetaudit/checkers.hpp"
#include "sheetaudit/error.hpp"
#include "sheetaudit/evaluation.hpp"
#include "sheetaudit/formula.hpp"
#include "sheetaudit/json_codec.hpp"
#include "sheetaudit/policy.hpp"
#include "sheetaudit/workbook_io.hpp"
#include "support/fixture_gen.hpp"
#include "support/oracles.hpp"
#include "support/planted_corpus.hpp"
#include "support/temp_dir.hpp"
#include "support/walkthrough.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace sheetaudit;
using namespace sheetaudit::checkers;
using Clock = std::chrono::steady_clock;

namespace {

const char* kAllCheckers = R"({"name":"all","checkers":[
    {"id":"blank-only-cells"},{"id":"constants-in-formulae"},{"id":"formula-consistency"},
    {"id":"reference-direction"},{"id":"unprotected-formula-cells"}]})";

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool ok;
    std::string detail;
};

struct Shell {
    int code;
    std::string out;
};

Shell run_binary(const std::string& args) {
    const std::string command = std::string("\"") + SHEETAUDIT_BINARY + "\" " + args + " 2>/dev/null";
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buffer[4096];
    for (std::size_t n; (n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0;) out.append(buffer, n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string quoted(const std::string& path) { return "\"" + path + "\""; }

Outcome parser_round_trip() {
    const auto start = Clock::now();
    std::ifstream in(std::string(SHEETAUDIT_TEST_DATA) + "/formula_corpus.txt");
    int lines = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        ++lines;
        try {
            const FormulaAst ast = parse_formula(line);
            if (!(parse_formula(print_formula(ast)) == ast)) return {false, "round trip differs: " + line};
        } catch (const Error& e) {
            return {false, line + ": " + e.what()};
        }
    }
    if (lines < 200) return {false, "corpus has only " + std::to_string(lines) + " formulas"};

    const std::string alphabet = "=+-*/^&%<>(),:;!$'\"{}[]#. 0123456789ABCDEFabcxyzSUMIF_\t";
    std::mt19937 rng(7);
    for (int i = 0; i < 10000; ++i) {
        std::string text = "=";
        const std::size_t length = rng() % 257;
        for (std::size_t k = 0; k < length; ++k)
            text += i % 2 ? static_cast<char>(rng() % 256) : alphabet[rng() % alphabet.size()];
        try {
            const FormulaAst ast = parse_formula(text);
            if (!(parse_formula(print_formula(ast)) == ast)) return {false, "fuzz round trip differs: " + text};
        } catch (const SyntaxError&) {
        } catch (const UnsupportedConstruct&) {
        } catch (const std::exception& e) {
            return {false, "fuzz input raised " + std::string(e.what())};
        }
    }
    const double elapsed = seconds_since(start);
    return {elapsed < 10, std::to_string(lines) + " corpus formulas, 10000 fuzz strings, " + std::to_string(elapsed) + " s"};
}

Outcome checker_oracles() {
    const auto start = Clock::now();
    std::mt19937 rng(99);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto fx = testsupport::random_fixture(rng, "acc" + std::to_string(trial));
        const AnalysisContext ctx(fx.workbook);
        ConstantsOptions co{1 + static_cast<std::int64_t>(rng() % 4), {}, rng() % 2 == 0};
        for (const char* v : {"1", "2.5", "abc", "1e2"})
            if (rng() % 3 == 0) co.ignore_values.push_back(v);
        mismatches += testsupport::observed(check_constants_in_formulae(ctx, co)) !=
                      testsupport::oracle_constants(fx, co.min_uses, co.ignore_values, co.include_text_literals);
        const bool require = rng() % 2 == 0;
        mismatches += testsupport::observed(check_unprotected_formula_cells(ctx, {require})) !=
                      testsupport::oracle_protection(fx, require);
        const bool cross = rng() % 2 == 0;
        mismatches += testsupport::observed(check_reference_direction(ctx, {cross})) !=
                      testsupport::oracle_direction(fx, cross);
        const bool any_ws = rng() % 2 == 0;
        mismatches += testsupport::observed(check_blank_only_cells(ctx, {any_ws})) != testsupport::oracle_blank(fx, any_ws);
        const std::int64_t min_run = 2 + static_cast<std::int64_t>(rng() % 3);
        mismatches += testsupport::observed(check_formula_consistency(ctx, {min_run})) !=
                      testsupport::oracle_consistency(fx, min_run);
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 60,
            "100 fixtures x 5 checkers, " + std::to_string(mismatches) + " mismatches, " + std::to_string(elapsed) + " s"};
}

Outcome walkthrough() {
    const Workbook book = read_fixture(testsupport::quarterly_fixture(), "q3.json");
    const Scenario scenario = json::parse_scenario(testsupport::kQuarterlyScenario);
    const AnalysisRun run = run_scenario(scenario, std::vector<Workbook>{book});
    if (run.findings.size() != 2) return {false, std::to_string(run.findings.size()) + " findings"};
    bool constant = false, unprotected = false;
    for (const auto& f : run.findings) {
        const std::string at = location_label(f.location);
        if (f.checker_id == "constants-in-formulae") {
            if (f.message.find("1.19") == std::string::npos || at != "Sales!H2") return {false, "constant finding: " + at};
            const std::vector<CellAddress> related{{0, 7, 1}, {0, 7, 2}, {0, 7, 3}};
            if (f.related_cells != related) return {false, "constant finding does not relate H2:H4"};
            constant = true;
        } else if (f.checker_id == "unprotected-formula-cells") {
            if (at != "Sales!G7") return {false, "unprotected finding: " + at};
            unprotected = true;
        }
    }
    return {constant && unprotected, "1.19 at Sales!H2 with H2:H4, unlocked formula at Sales!G7, constant 1 tolerated"};
}

Outcome perfect_rule() {
    const auto start = Clock::now();
    const auto corpus = testsupport::planted_corpus(5, 10, 10);
    const AnalysisRun run = run_scenario(json::parse_scenario(kAllCheckers), corpus.workbooks);
    const EvaluationResult result = evaluate_rules(std::vector<AnalysisRun>{run}, corpus.ratings);
    const double elapsed = seconds_since(start);
    for (const auto& m : result.metrics) {
        if (m.checker_id != "unprotected-formula-cells") continue;
        const bool ok = m.fp == 0 && m.fn == 0 && m.perfect && !m.mcc_undefined && m.mcc == 1.0 &&
                        result.ranking.front() == m.checker_id && elapsed < 30;
        return {ok, "tp=" + std::to_string(m.tp) + " tn=" + std::to_string(m.tn) + " fp=" + std::to_string(m.fp) +
                        " fn=" + std::to_string(m.fn) + " ranked first: " +
                        (result.ranking.front() == m.checker_id ? "yes" : "no")};
    }
    return {false, "checker missing from the evaluation"};
}

Outcome metrics_example() {
    const RuleMetrics m = compute_metrics("x", 3, 1, 1, 3);
    return {!m.mcc_undefined && m.mcc == 0.5, "mcc=" + std::to_string(m.mcc)};
}

Outcome determinism() {
    testsupport::TempDir dir("acc-det");
    const auto scenario = dir.write("all.json", kAllCheckers);
    const auto book = dir.write("q3.json", testsupport::quarterly_fixture());
    const std::string args = "analyze " + quoted(scenario) + " " + quoted(book);
    const Shell first = run_binary(args + " --threads 4");
    const Shell second = run_binary(args + " --threads 1");
    if (first.code != 1 || first.out.empty()) return {false, "first invocation exited " + std::to_string(first.code)};
    const bool same =
        testsupport::normalize_timestamps(first.out) == testsupport::normalize_timestamps(second.out);
    return {same, same ? "identical after timestamp normalisation" : "outputs differ"};
}

Workbook large_workbook() {
    Workbook book;
    book.id = "large";
    book.sheets.push_back(Sheet{"Data", {}, true});
    // 8000 values in A:H of rows 1-1000, 2000 formulas in I:J.
    for (int r = 0; r < 1000; ++r) {
        for (int c = 0; c < 8; ++c) put_cell(book, Cell{{0, c, r}, CellValue::number(r * 8 + c)});
        const std::string n = std::to_string(r + 1);
        put_cell(book, Cell{{0, 8, r}, FormulaContent{"=SUM(A" + n + ":H" + n + ")*1.19", CellValue()}});
        put_cell(book, Cell{{0, 9, r}, FormulaContent{r % 50 == 7 ? "=I" + n + "+2" : "=I" + n + "-A" + n, CellValue()},
                            r % 97 != 3});
    }
    return book;
}

Outcome performance() {
    const Workbook book = large_workbook();
    const Scenario scenario = json::parse_scenario(kAllCheckers);
    const auto start = Clock::now();
    const AnalysisRun run = run_scenario(scenario, std::vector<Workbook>{book});
    const double elapsed = seconds_since(start);
    std::size_t cells = 0;
    for (const auto& s : book.sheets) cells += s.cells.size();
    return {elapsed < 1.0 && cells == 10000 && book.formula_count() == 2000 && !run.findings.empty(),
            std::to_string(cells) + " cells, " + std::to_string(book.formula_count()) + " formulas, " +
                std::to_string(elapsed) + " s"};
}

Outcome exit_codes() {
    testsupport::TempDir dir("acc-exit");
    const auto scenario = dir.write("q.json", testsupport::kQuarterlyScenario);
    const auto clean = dir.write("clean.json", R"({"sheets":[{"name":"S","protection_enabled":true,"cells":{
        "A1":{"value":3},"A2":{"value":4},"A3":{"formula":"=A1+A2"}}}]})");
    const auto defective = dir.write("q3.json", testsupport::quarterly_fixture());
    const auto malformed = dir.write("bad.json", "{\"name\": \"x\", \"checkers\": [");
    const int c0 = run_binary("analyze " + quoted(scenario) + " " + quoted(clean)).code;
    const int c1 = run_binary("analyze " + quoted(scenario) + " " + quoted(defective)).code;
    const int c2 = run_binary("analyze " + quoted(malformed) + " " + quoted(clean)).code;
    return {c0 == 0 && c1 == 1 && c2 == 2,
            "clean " + std::to_string(c0) + ", defective " + std::to_string(c1) + ", malformed scenario " +
                std::to_string(c2)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"parser round trip and fuzz robustness", parser_round_trip},
        {"checkers agree with brute-force oracles", checker_oracles},
        {"quarterly report walkthrough", walkthrough},
        {"planted defect yields a perfect rule", perfect_rule},
        {"metrics example mcc 0.5", metrics_example},
        {"deterministic report output", determinism},
        {"10k-cell workbook under one second", performance},
        {"command line exit codes", exit_codes},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        failed += !outcome.ok;
        std::cout << (outcome.ok ? "PASS " : "FAIL ") << name << " (" << outcome.detail << ")" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
