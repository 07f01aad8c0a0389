#pragma once

// JSON forms of scenarios, runs, ratings and evaluations.

#include "sheetaudit/evaluation.hpp"
#include "sheetaudit/policy.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sheetaudit::json {

using Json = nlohmann::ordered_json;

Json param_to_json(const ParamValue& value);
/// Integers become integer, reals decimal, arrays of strings string-list.
ParamValue param_from_json(const Json& value, const std::string& where);

Json to_json(const CheckerDescriptor& descriptor);
Json to_json(const std::vector<ValidationIssue>& issues);

Json to_json(const Scenario& scenario);
/// Throws InvalidDocument on unknown keys or wrongly typed fields.
Scenario scenario_from_json(const Json& doc);
Scenario parse_scenario(std::string_view text);
std::string dump_scenario(const Scenario& scenario);

Json to_json(const CellAddress& address);
CellAddress cell_address_from_json(const Json& doc);
Json to_json(const FindingLocation& location);
FindingLocation location_from_json(const Json& doc);
Json to_json(const Finding& finding);
Finding finding_from_json(const Json& doc);

/// Everything of the run except its findings.
Json run_metadata_to_json(const AnalysisRun& run);
AnalysisRun run_metadata_from_json(const Json& doc);

Json to_json(const std::vector<ExpertRating>& ratings);
std::vector<ExpertRating> ratings_from_json(const Json& doc);
std::vector<ExpertRating> parse_ratings(std::string_view text);

Json to_json(const EvaluationResult& result);
EvaluationResult evaluation_from_json(const Json& doc);

/// Parses text, turning syntax errors into InvalidDocument.
Json parse(std::string_view text, const std::string& what);

}  // namespace sheetaudit::json
