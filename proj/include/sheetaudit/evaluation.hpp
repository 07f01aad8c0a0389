#pragma once

#include "sheetaudit/policy.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheetaudit {

enum class Rating { good, poor };

std::string_view to_string(Rating rating);
std::optional<Rating> parse_rating(std::string_view text);

struct ExpertRating {
    std::string workbook_id;
    std::string expert_id;
    Rating rating = Rating::good;
    /// Absent when the expert did not log errors; present but empty when
    /// they looked and found none.
    std::optional<std::vector<std::string>> error_cells;
    std::string notes;

    friend bool operator==(const ExpertRating&, const ExpertRating&) = default;
};

struct ConsensusRating {
    std::string workbook_id;
    std::optional<Rating> rating;  ///< Empty when the experts are split evenly.
    int good_votes = 0;
    int poor_votes = 0;
    /// Sorted union over all experts; empty optional if no expert logged
    /// errors for this workbook.
    std::optional<std::vector<std::string>> error_cells;

    friend bool operator==(const ConsensusRating&, const ConsensusRating&) = default;
};

/// One consensus per workbook, ordered by workbook id. A strict majority
/// decides; ties stay undecided.
std::vector<ConsensusRating> aggregate_experts(std::span<const ExpertRating> ratings);

struct RuleMetrics {
    std::string checker_id;
    int tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0, recall = 0, accuracy = 0, mcc = 0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool accuracy_undefined = false;
    bool mcc_undefined = false;
    bool perfect = false;

    friend bool operator==(const RuleMetrics&, const RuleMetrics&) = default;
};

/// Ratios and the perfect flag from the four counts.
RuleMetrics compute_metrics(std::string checker_id, int tp, int fp, int fn, int tn);

struct CellMatchStats {
    std::string checker_id;
    int hits = 0;      ///< Expert error cells matched by at least one finding.
    int misses = 0;    ///< Expert error cells matched by no finding.
    int spurious = 0;  ///< Findings that match no expert error cell.

    friend bool operator==(const CellMatchStats&, const CellMatchStats&) = default;
};

struct EvaluationResult {
    std::vector<RuleMetrics> metrics;  ///< By checker id.
    std::vector<CellMatchStats> cell_matches;  ///< Empty when no expert logged error cells.
    std::vector<std::string> ranking;  ///< By mcc descending, ties by id.
    std::vector<ConsensusRating> consensus;
    std::vector<std::string> notes;

    friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};
class UnratedWorkbook : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};
class RatingWithoutRun : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};
class ScenarioMismatch : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};
class NoErrorCells : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};
class MalformedErrorCell : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

/// Workbook-level confusion matrix per enabled checker of the (shared)
/// scenario. Every workbook in the runs must be rated and every rating must
/// refer to a workbook of exactly one run.
EvaluationResult evaluate_rules(std::span<const AnalysisRun> runs, std::span<const ExpertRating> ratings);

/// Cell-level comparison of findings with expert error logs. Throws
/// NoErrorCells when no rating carries error_cells.
std::vector<CellMatchStats> match_error_cells(const AnalysisRun& run, std::span<const ExpertRating> ratings);

}  // namespace sheetaudit
