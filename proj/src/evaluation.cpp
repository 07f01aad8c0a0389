#include "sheetaudit/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace sheetaudit {

std::string_view to_string(Rating rating) { return rating == Rating::good ? "good" : "poor"; }

std::optional<Rating> parse_rating(std::string_view text) {
    if (text == "good") return Rating::good;
    if (text == "poor") return Rating::poor;
    return std::nullopt;
}

std::vector<ConsensusRating> aggregate_experts(std::span<const ExpertRating> ratings) {
    std::map<std::string, ConsensusRating> by_workbook;
    for (const auto& r : ratings) {
        auto& c = by_workbook[r.workbook_id];
        c.workbook_id = r.workbook_id;
        (r.rating == Rating::good ? c.good_votes : c.poor_votes) += 1;
        if (r.error_cells) {
            if (!c.error_cells) c.error_cells.emplace();
            for (const auto& cell : *r.error_cells) {
                if (std::find(c.error_cells->begin(), c.error_cells->end(), cell) == c.error_cells->end())
                    c.error_cells->push_back(cell);
            }
        }
    }
    std::vector<ConsensusRating> out;
    for (auto& [id, c] : by_workbook) {
        if (c.good_votes > c.poor_votes) c.rating = Rating::good;
        if (c.poor_votes > c.good_votes) c.rating = Rating::poor;
        if (c.error_cells) std::sort(c.error_cells->begin(), c.error_cells->end());
        out.push_back(std::move(c));
    }
    return out;
}

RuleMetrics compute_metrics(std::string checker_id, int tp, int fp, int fn, int tn) {
    RuleMetrics m{std::move(checker_id), tp, fp, fn, tn};
    auto ratio = [](double num, double den, double& value, bool& undefined) {
        undefined = den == 0;
        value = undefined ? 0 : num / den;
    };
    ratio(tp, tp + fp, m.precision, m.precision_undefined);
    ratio(tp, tp + fn, m.recall, m.recall_undefined);
    ratio(tp + tn, tp + fp + fn + tn, m.accuracy, m.accuracy_undefined);
    const double den = static_cast<double>(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    ratio(static_cast<double>(tp) * tn - static_cast<double>(fp) * fn, std::sqrt(den), m.mcc, m.mcc_undefined);
    m.perfect = fp == 0 && fn == 0 && tp + tn > 0;
    return m;
}

namespace {

struct ErrorCell {
    int sheet_index;
    int column;
    int row;
    auto operator<=>(const ErrorCell&) const = default;
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

// "Sheet1!B4", "'My Sheet'!B4" or a bare "B4" meaning the first sheet.
ErrorCell resolve_error_cell(const std::string& text, const WorkbookSummary& workbook) {
    auto fail = [&](const std::string& why) {
        return MalformedErrorCell("error cell '" + text + "' of workbook '" + workbook.id + "': " + why);
    };
    std::string sheet;
    std::string address = text;
    if (const auto bang = text.rfind('!'); bang != std::string::npos) {
        sheet = text.substr(0, bang);
        address = text.substr(bang + 1);
        if (sheet.size() >= 2 && sheet.front() == '\'' && sheet.back() == '\'') {
            std::string unquoted;
            for (std::size_t i = 1; i + 1 < sheet.size(); ++i) {
                unquoted += sheet[i];
                if (sheet[i] == '\'' && sheet[i + 1] == '\'') ++i;
            }
            sheet = unquoted;
        }
        if (sheet.empty()) throw fail("empty sheet name");
    }
    int sheet_index = 0;
    if (!sheet.empty()) {
        const auto& names = workbook.sheet_names;
        const auto it = std::find_if(names.begin(), names.end(), [&](const std::string& n) { return iequals(n, sheet); });
        if (it == names.end()) throw fail("no sheet named '" + sheet + "'");
        sheet_index = static_cast<int>(it - names.begin());
    } else if (workbook.sheet_names.empty()) {
        throw fail("workbook has no sheets");
    }
    try {
        const A1Address a = parse_a1_address(address);
        return {sheet_index, a.column, a.row};
    } catch (const MalformedAddress& e) {
        throw fail(e.what());
    }
}

bool finding_matches(const Finding& f, const ErrorCell& cell) {
    const CellAddress address{cell.sheet_index, cell.column, cell.row};
    if (std::find(f.related_cells.begin(), f.related_cells.end(), address) != f.related_cells.end()) return true;
    if (const auto* c = std::get_if<CellLocation>(&f.location)) return c->cell == address;
    if (const auto* r = std::get_if<RangeLocation>(&f.location)) {
        return r->first.sheet_index == cell.sheet_index && r->first.column <= cell.column &&
               cell.column <= r->last.column && r->first.row <= cell.row && cell.row <= r->last.row;
    }
    return false;
}

std::vector<std::string> enabled_checkers(const Scenario& scenario) {
    std::vector<std::string> ids;
    for (const auto& c : scenario.checkers) {
        if (c.enabled) ids.push_back(c.checker_id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void accumulate_matches(const AnalysisRun& run, const std::vector<ConsensusRating>& consensus,
                        std::map<std::string, CellMatchStats>& stats) {
    for (const auto& c : consensus) {
        if (!c.error_cells) continue;
        const WorkbookSummary* workbook = run.workbook(c.workbook_id);
        if (!workbook) continue;
        std::vector<ErrorCell> expert;
        for (const auto& text : *c.error_cells) {
            const ErrorCell cell = resolve_error_cell(text, *workbook);
            if (std::find(expert.begin(), expert.end(), cell) == expert.end()) expert.push_back(cell);
        }
        for (auto& [checker, s] : stats) {
            std::vector<const Finding*> findings;
            for (const auto& f : run.findings) {
                if (f.checker_id == checker && f.workbook_id == c.workbook_id) findings.push_back(&f);
            }
            for (const auto& cell : expert) {
                const bool matched =
                    std::any_of(findings.begin(), findings.end(), [&](const Finding* f) { return finding_matches(*f, cell); });
                (matched ? s.hits : s.misses) += 1;
            }
            for (const Finding* f : findings) {
                if (std::none_of(expert.begin(), expert.end(), [&](const ErrorCell& cell) { return finding_matches(*f, cell); }))
                    ++s.spurious;
            }
        }
    }
}

std::map<std::string, CellMatchStats> empty_stats(const std::vector<std::string>& checkers) {
    std::map<std::string, CellMatchStats> stats;
    for (const auto& id : checkers) stats[id] = CellMatchStats{id};
    return stats;
}

std::vector<CellMatchStats> values_of(const std::map<std::string, CellMatchStats>& stats) {
    std::vector<CellMatchStats> out;
    for (const auto& [id, s] : stats) out.push_back(s);
    return out;
}

}  // namespace

std::vector<CellMatchStats> match_error_cells(const AnalysisRun& run, std::span<const ExpertRating> ratings) {
    if (std::none_of(ratings.begin(), ratings.end(), [](const ExpertRating& r) { return r.error_cells.has_value(); }))
        throw NoErrorCells("no rating carries error cells");
    auto stats = empty_stats(enabled_checkers(run.scenario));
    accumulate_matches(run, aggregate_experts(ratings), stats);
    return values_of(stats);
}

EvaluationResult evaluate_rules(std::span<const AnalysisRun> runs, std::span<const ExpertRating> ratings) {
    if (ratings.empty()) throw EvaluationError("at least one rating is required");
    if (runs.empty()) throw RatingWithoutRun("workbook '" + ratings.front().workbook_id + "' is not part of any run");
    for (const auto& run : runs) {
        if (!(run.scenario == runs.front().scenario))
            throw ScenarioMismatch("run '" + run.run_id + "' used scenario '" + run.scenario.name + "', run '" +
                                   runs.front().run_id + "' used '" + runs.front().scenario.name + "'");
    }

    std::map<std::string, const AnalysisRun*> run_of;
    for (const auto& run : runs) {
        for (const auto& w : run.workbooks) {
            if (!run_of.emplace(w.id, &run).second)
                throw EvaluationError("workbook '" + w.id + "' appears in more than one run");
        }
    }
    std::set<std::string> rated;
    for (const auto& r : ratings) {
        if (!run_of.count(r.workbook_id))
            throw RatingWithoutRun("rating by '" + r.expert_id + "' refers to workbook '" + r.workbook_id +
                                   "', which is not part of any run");
        rated.insert(r.workbook_id);
    }
    for (const auto& [id, run] : run_of) {
        if (!rated.count(id)) throw UnratedWorkbook("workbook '" + id + "' of run '" + run->run_id + "' has no rating");
    }

    EvaluationResult result;
    result.consensus = aggregate_experts(ratings);
    for (const auto& c : result.consensus) {
        if (!c.rating)
            result.notes.push_back("workbook '" + c.workbook_id + "' is undecided (" + std::to_string(c.good_votes) +
                                   " good, " + std::to_string(c.poor_votes) + " poor) and was excluded");
    }

    const auto checkers = enabled_checkers(runs.front().scenario);
    std::set<std::pair<std::string, std::string>> fires;  // (checker, workbook)
    for (const auto& run : runs) {
        for (const auto& f : run.findings) fires.emplace(f.checker_id, f.workbook_id);
    }
    for (const auto& checker : checkers) {
        int tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& c : result.consensus) {
            if (!c.rating) continue;
            const bool fired = fires.count({checker, c.workbook_id}) > 0;
            const bool poor = *c.rating == Rating::poor;
            (fired ? (poor ? tp : fp) : (poor ? fn : tn)) += 1;
        }
        result.metrics.push_back(compute_metrics(checker, tp, fp, fn, tn));
    }

    result.ranking = checkers;
    std::map<std::string, double> mcc;
    for (const auto& m : result.metrics) mcc[m.checker_id] = m.mcc;
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [&](const std::string& a, const std::string& b) { return mcc[a] > mcc[b]; });

    if (std::any_of(result.consensus.begin(), result.consensus.end(),
                    [](const ConsensusRating& c) { return c.error_cells.has_value(); })) {
        auto stats = empty_stats(checkers);
        for (const auto& run : runs) accumulate_matches(run, result.consensus, stats);
        result.cell_matches = values_of(stats);
    } else {
        result.notes.push_back("no expert logged error cells; cell-level matching skipped");
    }
    return result;
}

}  // namespace sheetaudit
