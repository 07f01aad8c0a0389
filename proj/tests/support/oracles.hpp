#pragma once

// Brute-force reference implementations of the five checkers. They read the
// generator's formula metadata instead of parsing, and only compare cell
// positions, so they share no code path with the library's checkers.

#include "sheetaudit/policy.hpp"
#include "support/fixture_gen.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace testsupport {

struct ExpectedFinding {
    sheetaudit::CellAddress at;
    std::vector<sheetaudit::CellAddress> related;  ///< Sorted.

    friend auto operator<=>(const ExpectedFinding&, const ExpectedFinding&) = default;
};

inline bool reading_order(const sheetaudit::CellAddress& a, const sheetaudit::CellAddress& b) {
    return std::tie(a.sheet_index, a.row, a.column) < std::tie(b.sheet_index, b.row, b.column);
}

inline std::vector<ExpectedFinding> observed(const std::vector<sheetaudit::Finding>& findings) {
    std::vector<ExpectedFinding> out;
    for (const auto& f : findings) {
        ExpectedFinding e{std::get<sheetaudit::CellLocation>(f.location).cell, f.related_cells};
        std::sort(e.related.begin(), e.related.end());
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<ExpectedFinding> finish(std::vector<ExpectedFinding> v) {
    for (auto& e : v) std::sort(e.related.begin(), e.related.end());
    std::sort(v.begin(), v.end());
    return v;
}

inline std::vector<ExpectedFinding> oracle_constants(const GeneratedFixture& fx, std::int64_t min_uses,
                                                     const std::vector<std::string>& ignore, bool include_text) {
    // Keys: numbers as doubles, text literals as strings.
    std::vector<std::pair<std::variant<double, std::string>, std::vector<sheetaudit::CellAddress>>> uses;
    auto record = [&](const std::variant<double, std::string>& key, const sheetaudit::CellAddress& cell) {
        for (auto& [k, cells] : uses) {
            if (k == key) {
                if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
                return;
            }
        }
        uses.push_back({key, {cell}});
    };
    for (const auto& [address, meta] : fx.formulas) {
        if (!meta.parseable) continue;
        for (double v : meta.numeric_constants) record(v == 0 ? 0.0 : v, address);
        if (include_text) {
            for (const auto& t : meta.text_literals) record(t, address);
        }
    }
    auto ignored = [&](const std::variant<double, std::string>& key) {
        for (const auto& entry : ignore) {
            if (const auto* s = std::get_if<std::string>(&key); s && *s == entry) return true;
            if (const auto* d = std::get_if<double>(&key)) {
                try {
                    std::size_t used = 0;
                    const double parsed = std::stod(entry, &used);
                    if (used == entry.size() && parsed == *d) return true;
                } catch (const std::exception&) {
                }
            }
        }
        return false;
    };
    std::vector<ExpectedFinding> out;
    for (auto& [key, cells] : uses) {
        if (static_cast<std::int64_t>(cells.size()) < min_uses || ignored(key)) continue;
        std::sort(cells.begin(), cells.end(), reading_order);
        out.push_back({cells.front(), cells});
    }
    return finish(std::move(out));
}

inline std::vector<ExpectedFinding> oracle_protection(const GeneratedFixture& fx, bool require_sheet_protection) {
    std::vector<ExpectedFinding> out;
    for (const auto& sheet : fx.workbook.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (!cell.is_formula()) continue;
            const bool ok = cell.locked && (sheet.protection_enabled || !require_sheet_protection);
            if (!ok) out.push_back({cell.address, {}});
        }
    }
    return finish(std::move(out));
}

inline std::vector<ExpectedFinding> oracle_direction(const GeneratedFixture& fx, bool cross_sheet) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    std::vector<ExpectedFinding> out;
    for (const auto& [host, meta] : fx.formulas) {
        if (!meta.parseable) continue;
        bool violates = false;
        std::set<sheetaudit::CellAddress> related;
        for (const auto& ref : meta.refs) {
            std::optional<int> sheet = host.sheet_index;
            if (ref.sheet) {
                sheet.reset();
                for (int s = 0; s < static_cast<int>(fx.workbook.sheets.size()); ++s) {
                    if (lower(fx.workbook.sheets[static_cast<std::size_t>(s)].name) == lower(*ref.sheet)) sheet = s;
                }
            }
            if (sheet != host.sheet_index && !cross_sheet) continue;
            if (ref.far_column > host.column || ref.far_row > host.row) {
                violates = true;
                if (sheet) related.insert({*sheet, ref.far_column, ref.far_row});
            }
        }
        if (violates) out.push_back({host, {related.begin(), related.end()}});
    }
    return finish(std::move(out));
}

/// Code points with the Unicode White_Space property, as UTF-8.
inline const std::vector<std::string>& unicode_spaces() {
    static const std::vector<std::string> spaces = {
        "\t", "\n", "\v", "\f", "\r", " ", "\xc2\x85", "\xc2\xa0", "\xe1\x9a\x80",
        "\xe2\x80\x80", "\xe2\x80\x81", "\xe2\x80\x82", "\xe2\x80\x83", "\xe2\x80\x84", "\xe2\x80\x85",
        "\xe2\x80\x86", "\xe2\x80\x87", "\xe2\x80\x88", "\xe2\x80\x89", "\xe2\x80\x8a", "\xe2\x80\xa8",
        "\xe2\x80\xa9", "\xe2\x80\xaf", "\xe2\x81\x9f", "\xe3\x80\x80"};
    return spaces;
}

inline bool oracle_is_blank(const std::string& text, bool any_whitespace) {
    if (text.empty()) return false;
    if (!any_whitespace) return text.find_first_not_of(' ') == std::string::npos;
    std::size_t at = 0;
    while (at < text.size()) {
        bool matched = false;
        for (const auto& s : unicode_spaces()) {
            if (text.compare(at, s.size(), s) == 0) {
                at += s.size();
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

inline std::vector<ExpectedFinding> oracle_blank(const GeneratedFixture& fx, bool any_whitespace) {
    std::vector<ExpectedFinding> out;
    for (const auto& sheet : fx.workbook.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.is_formula() || !cell.value().is_text()) continue;
            if (oracle_is_blank(cell.value().as_text(), any_whitespace)) out.push_back({cell.address, {}});
        }
    }
    return finish(std::move(out));
}

inline std::vector<ExpectedFinding> oracle_consistency(const GeneratedFixture& fx, std::int64_t min_run) {
    std::vector<ExpectedFinding> out;
    auto judge = [&](const std::vector<const FormulaMeta*>& run) {
        if (static_cast<std::int64_t>(run.size()) < min_run) return;
        std::map<std::string, std::size_t> counts;
        for (const auto* m : run) ++counts[m->shape];
        if (counts.size() < 2) return;
        std::string baseline = run.front()->shape;
        for (const auto& [shape, n] : counts) {
            if (2 * n > run.size()) baseline = shape;
        }
        std::vector<sheetaudit::CellAddress> extent;
        for (const auto* m : run) extent.push_back(m->host);
        for (const auto* m : run) {
            if (m->shape != baseline) out.push_back({m->host, extent});
        }
    };
    for (int sheet = 0; sheet < static_cast<int>(fx.workbook.sheets.size()); ++sheet) {
        for (int pass = 0; pass < 2; ++pass) {
            const bool rows = pass == 0;
            // Walk every line of the grid cell by cell.
            for (int line = 0; line < 64; ++line) {
                std::vector<const FormulaMeta*> run;
                for (int k = 0; k < 64; ++k) {
                    const sheetaudit::CellAddress at{sheet, rows ? k : line, rows ? line : k};
                    auto it = fx.formulas.find(at);
                    if (it != fx.formulas.end() && it->second.parseable) {
                        run.push_back(&it->second);
                    } else {
                        judge(run);
                        run.clear();
                    }
                }
                judge(run);
            }
        }
    }
    return finish(std::move(out));
}

}  // namespace testsupport
