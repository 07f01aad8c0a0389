#include "sheetaudit/cli.hpp"

#include "sheetaudit/error.hpp"
#include "sheetaudit/files.hpp"
#include "sheetaudit/json_codec.hpp"
#include "sheetaudit/report.hpp"
#include "sheetaudit/service.hpp"
#include "sheetaudit/workbook_io.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace sheetaudit {

namespace {

constexpr int kClean = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

/// Input problem already phrased for the user.
struct UsageError {
    std::string message;
};

void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << content;
        return;
    }
    try {
        write_file_atomic(out_path, content);
    } catch (const Error& e) {
        throw UsageError{e.what()};
    }
}

std::string read_input(const std::string& path) {
    try {
        return read_file(path);
    } catch (const Error& e) {
        throw UsageError{e.what()};
    }
}

struct AnalyzeArgs {
    std::string scenario;
    std::vector<std::string> workbooks;
    std::string format = "json";
    std::string out;
    std::string group = "by_checker";
    std::string filter;
    unsigned threads = 0;
};

int analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
    const auto format = parse_report_format(args.format);
    if (!format) throw UsageError{"--format must be json or text, not '" + args.format + "'"};
    const auto group = parse_group_key(args.group);
    if (!group) throw UsageError{"--group must be by_cell, by_checker or by_workbook, not '" + args.group + "'"};
    FilterSpec filter;
    try {
        filter = parse_filter(args.filter);
    } catch (const InvalidDocument& e) {
        throw UsageError{std::string("--filter: ") + e.what()};
    }

    Scenario scenario;
    try {
        scenario = json::parse_scenario(read_input(args.scenario));
    } catch (const InvalidDocument& e) {
        throw UsageError{args.scenario + ": " + e.what()};
    }
    if (const auto issues = validate_scenario(scenario); !issues.empty()) {
        std::string message = args.scenario + ": invalid scenario";
        for (const auto& i : issues) message += "\n  " + std::string(to_string(i.kind)) + ": " + i.message;
        throw UsageError{message};
    }

    std::vector<Workbook> books;
    for (const auto& path : args.workbooks) {
        try {
            books.push_back(load_workbook(path));
        } catch (const Error& e) {
            const std::string what = e.what();
            throw UsageError{what.find(path) == std::string::npos ? path + ": " + what : what};
        }
    }

    AnalysisRun run;
    try {
        run = run_scenario(scenario, books, builtin_registry(), RunOptions{args.threads});
    } catch (const Error& e) {
        throw UsageError{e.what()};
    }
    for (const auto& f : run.checker_failures)
        err << "warning: checker '" << f.checker_id << "' failed on '" << f.workbook_id << "': " << f.detail << "\n";

    const Report report = build_report(run, *group, filter);
    emit(serialize_report(report, *format), args.out, out);
    return report.totals.findings == 0 ? kClean : kFindings;
}

struct EvalArgs {
    std::string ratings;
    std::vector<std::string> runs;
    std::string format = "text";
    std::string out;
};

int evaluate(const EvalArgs& args, std::ostream& out) {
    const auto format = parse_report_format(args.format);
    if (!format) throw UsageError{"--format must be json or text, not '" + args.format + "'"};
    std::vector<ExpertRating> ratings;
    try {
        ratings = json::parse_ratings(read_input(args.ratings));
    } catch (const InvalidDocument& e) {
        throw UsageError{args.ratings + ": " + e.what()};
    }
    std::vector<AnalysisRun> runs;
    for (const auto& path : args.runs) {
        try {
            runs.push_back(deserialize_report(read_input(path)).run);
        } catch (const InvalidDocument& e) {
            throw UsageError{path + ": " + e.what()};
        }
    }
    EvaluationResult result;
    try {
        result = evaluate_rules(runs, ratings);
    } catch (const EvaluationError& e) {
        throw UsageError{e.what()};
    }
    emit(*format == ReportFormat::json ? json::to_json(result).dump(2) + "\n" : format_evaluation_text(result), args.out,
         out);
    return kClean;
}

struct ServeArgs {
    std::string workspace;
    int port = -1;
    std::size_t max_upload = 0;
    std::string host = "127.0.0.1";
};

int serve(const ServeArgs& args, std::ostream& err) {
    ServiceOptions options;
    int port = 0;
    try {
        options = service_options_from_env();
        port = args.port >= 0 ? args.port : service_port_from_env();
    } catch (const Error& e) {
        throw UsageError{e.what()};
    }
    if (!args.workspace.empty()) options.workspace = args.workspace;
    if (args.max_upload) options.max_upload = args.max_upload;
    try {
        Service service(options);
        const int bound = service.bind(args.host, port);
        err << "serving " << options.workspace.string() << " on http://" << args.host << ":" << bound << std::endl;
        service.serve();
    } catch (const Error& e) {
        throw UsageError{e.what()};
    }
    return kClean;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Static quality checks for spreadsheets", "sheetaudit"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Run a scenario over workbooks and print the report");
    analyze_cmd->add_option("scenario", analyze_args.scenario, "Scenario json file")->required();
    analyze_cmd->add_option("workbooks", analyze_args.workbooks, "Workbooks (.xlsx or .json fixtures)")->required();
    analyze_cmd->add_option("--format", analyze_args.format, "json or text")->capture_default_str();
    analyze_cmd->add_option("--out", analyze_args.out, "Write the report here instead of standard output");
    analyze_cmd->add_option("--group", analyze_args.group, "by_cell, by_checker or by_workbook")->capture_default_str();
    analyze_cmd->add_option("--filter", analyze_args.filter, "e.g. \"checker=a,b;severity=error;cells=Sheet1!A1:C9\"");
    analyze_cmd->add_option("--threads", analyze_args.threads, "Worker threads, 0 for one per core");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Score the checkers of analysis runs against expert ratings");
    eval_cmd->add_option("--ratings", eval_args.ratings, "Ratings json file")->required();
    eval_cmd->add_option("runs", eval_args.runs, "Run reports written by analyze --format json")->required();
    eval_cmd->add_option("--format", eval_args.format, "json or text")->capture_default_str();
    eval_cmd->add_option("--out", eval_args.out, "Write the result here instead of standard output");

    auto* checkers_cmd = app.add_subcommand("checkers", "List the available checkers and their parameters");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP api over a workspace directory");
    serve_cmd->add_option("--workspace", serve_args.workspace, "Workspace root (default $WORKBENCH_WORKSPACE)");
    serve_cmd->add_option("--port", serve_args.port, "Port (default $WORKBENCH_PORT or 8080)");
    serve_cmd->add_option("--host", serve_args.host, "Interface to bind")->capture_default_str();
    serve_cmd->add_option("--max-upload", serve_args.max_upload, "Upload limit in bytes (default $WORKBENCH_MAX_UPLOAD)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*analyze_cmd) return analyze(analyze_args, out, err);
        if (*eval_cmd) return evaluate(eval_args, out);
        if (*checkers_cmd) {
            json::Json list = json::Json::array();
            for (const auto& d : list_checkers()) list.push_back(json::to_json(d));
            out << list.dump(2) << "\n";
            return kClean;
        }
        if (*serve_cmd) return serve(serve_args, err);
    } catch (const UsageError& e) {
        err << "sheetaudit: " << e.message << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace sheetaudit
