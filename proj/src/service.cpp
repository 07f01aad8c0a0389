#include "sheetaudit/service.hpp"

#include "fingerprint.hpp"
#include "sheetaudit/error.hpp"
#include "sheetaudit/files.hpp"
#include "sheetaudit/json_codec.hpp"
#include "sheetaudit/report.hpp"
#include "sheetaudit/workbook_io.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <semaphore>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace sheetaudit {

namespace fs = std::filesystem;
using json::Json;

ServiceOptions service_options_from_env() {
    ServiceOptions options;
    if (const char* root = std::getenv("WORKBENCH_WORKSPACE"); root && *root) options.workspace = root;
    if (const char* limit = std::getenv("WORKBENCH_MAX_UPLOAD"); limit && *limit) {
        char* end = nullptr;
        const auto value = std::strtoull(limit, &end, 10);
        if (*end != '\0' || value == 0) throw Error(std::string("WORKBENCH_MAX_UPLOAD is not a byte count: ") + limit);
        options.max_upload = static_cast<std::size_t>(value);
    }
    return options;
}

int service_port_from_env() {
    const char* port = std::getenv("WORKBENCH_PORT");
    if (!port || !*port) return 8080;
    char* end = nullptr;
    const long value = std::strtol(port, &end, 10);
    if (*end != '\0' || value < 0 || value > 65535) throw Error(std::string("WORKBENCH_PORT is not a port: ") + port);
    return static_cast<int>(value);
}

namespace {

/// Raised inside handlers; turned into a json error body.
struct HttpError {
    int status;
    std::string code;
    std::string message;
    Json issues = nullptr;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
    throw HttpError{status, std::move(code), std::move(message)};
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
    Json body{{"error", e.code}, {"message", e.message}};
    if (!e.issues.is_null()) body["issues"] = e.issues;
    send_json(res, e.status, body);
}

bool valid_scenario_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9][A-Za-z0-9._-]{0,99}");
    return std::regex_match(id, pattern);
}

/// File-system safe name for arbitrary ids; a hash suffix keeps distinct ids apart.
std::string slug(const std::string& id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ? c : '_';
    if (out.empty() || out.front() == '.' || out != id || out.size() > 100) {
        out = out.substr(0, 80);
        out += "~" + detail::Fingerprint().add(id).hex().substr(0, 12);
    }
    return out;
}

std::string etag_of(std::string_view content) { return "\"" + detail::Fingerprint().add(content).hex() + "\""; }

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

Json parse_body(const httplib::Request& req, const std::string& what) {
    try {
        return json::parse(req.body, what);
    } catch (const InvalidDocument& e) {
        fail(400, "invalid_document", e.what());
    }
}

/// Exclusive, non-blocking hold on one scenario id, both within this process
/// and across processes sharing the workspace.
class ScenarioLock {
public:
    ScenarioLock(std::mutex& mutex, const fs::path& lock_file) : mutex_(mutex) {
        if (!mutex_.try_lock()) return;
        fd_ = ::open(lock_file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            if (fd_ >= 0) ::close(fd_);
            fd_ = -1;
            mutex_.unlock();
            return;
        }
        held_ = true;
    }
    ~ScenarioLock() {
        if (!held_) return;
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
        mutex_.unlock();
    }
    ScenarioLock(const ScenarioLock&) = delete;
    ScenarioLock& operator=(const ScenarioLock&) = delete;
    bool held() const { return held_; }

private:
    std::mutex& mutex_;
    int fd_ = -1;
    bool held_ = false;
};

}  // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;
    std::counting_semaphore<> analysis_slots;
    std::mutex locks_mutex;
    std::map<std::string, std::unique_ptr<std::mutex>> scenario_locks;
    std::mutex upload_mutex;

    explicit Impl(ServiceOptions o)
        : options(std::move(o)), analysis_slots(static_cast<std::ptrdiff_t>(std::max(1u, options.analysis_workers))) {
        for (const char* sub : {"scenarios", "workbooks", "runs", "ratings"}) {
            std::error_code ec;
            fs::create_directories(options.workspace / sub, ec);
            if (ec) throw IoFailure("cannot create workspace directory " + (options.workspace / sub).string() + ": " + ec.message());
        }
        const unsigned threads = std::max(1u, options.http_threads);
        server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
        // Multipart framing needs a little room beyond the file itself.
        server.set_payload_max_length(options.max_upload + 64 * 1024);
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        routes();
    }

    fs::path dir(const char* sub) const { return options.workspace / sub; }

    std::mutex& scenario_mutex(const std::string& id) {
        std::lock_guard guard(locks_mutex);
        auto& slot = scenario_locks[id];
        if (!slot) slot = std::make_unique<std::mutex>();
        return *slot;
    }

    // ---- handler plumbing

    template <class F>
    httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const HttpError& e) {
                send_error(res, e);
            } catch (const std::exception& e) {
                incident(res, e.what());
            } catch (...) {
                incident(res, "unknown exception");
            }
        };
    }

    static void incident(httplib::Response& res, const std::string& detail) {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        char id[32];
        std::snprintf(id, sizeof id, "inc-%08x%04x", rd(), counter++ & 0xffffu);
        std::cerr << "sheetaudit service: incident " << id << ": " << detail << std::endl;
        send_json(res, 500, Json{{"error", "internal"}, {"message", "internal error"}, {"incident", id}});
    }

    // ---- storage

    std::optional<std::string> read_optional(const fs::path& path) const {
        if (!fs::exists(path)) return std::nullopt;
        return read_file(path);
    }

    Scenario load_scenario(const std::string& id) const {
        const auto text = read_optional(dir("scenarios") / (id + ".json"));
        if (!text) fail(404, "not_found", "no scenario '" + id + "'");
        return json::parse_scenario(*text);
    }

    Json workbook_meta(const std::string& id) const {
        const auto text = read_optional(dir("workbooks") / (slug(id) + ".json"));
        if (!text) fail(404, "not_found", "no workbook '" + id + "'");
        return json::parse(*text, "workbook metadata");
    }

    Workbook load_workbook_by_id(const std::string& id) const {
        const Json meta = workbook_meta(id);
        const std::string bytes = read_file(dir("workbooks") / (slug(id) + ".data"));
        Workbook book = read_workbook(bytes, meta.at("filename").get<std::string>());
        book.id = id;
        return book;
    }

    AnalysisRun load_run(const std::string& id) const {
        if (!valid_scenario_id(id)) fail(404, "not_found", "no run '" + id + "'");
        const auto text = read_optional(dir("runs") / (id + ".json"));
        if (!text) fail(404, "not_found", "no run '" + id + "'");
        return deserialize_report(*text).run;
    }

    std::vector<ExpertRating> load_ratings(const std::string& workbook_id) const {
        const auto text = read_optional(dir("ratings") / (slug(workbook_id) + ".json"));
        if (!text) return {};
        return json::parse_ratings(*text);
    }

    std::vector<std::string> list_ids(const char* sub) const {
        std::vector<std::string> ids;
        for (const auto& entry : fs::directory_iterator(dir(sub))) {
            if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    // ---- routes

    void routes() {
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, If-Match, If-None-Match");
            res.status = 204;
        });

        server.Get("/checkers", guarded([](const httplib::Request&, httplib::Response& res) {
            Json out = Json::array();
            for (const auto& d : list_checkers()) out.push_back(json::to_json(d));
            send_json(res, 200, out);
        }));

        server.Get("/scenarios", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json{{"scenario_ids", list_ids("scenarios")}});
        }));
        server.Get(R"(/scenarios/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            if (!valid_scenario_id(id)) fail(404, "not_found", "no scenario '" + id + "'");
            const auto text = read_optional(dir("scenarios") / (id + ".json"));
            if (!text) fail(404, "not_found", "no scenario '" + id + "'");
            res.set_header("ETag", etag_of(*text));
            res.status = 200;
            res.set_content(*text, "application/json");
        }));
        server.Put(R"(/scenarios/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            put_scenario(req, res);
        }));
        server.Delete(R"(/scenarios/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            if (!valid_scenario_id(id)) fail(404, "not_found", "no scenario '" + id + "'");
            ScenarioLock lock(scenario_mutex(id), dir("scenarios") / ("." + id + ".lock"));
            if (!lock.held()) fail(409, "conflict", "scenario '" + id + "' is being written concurrently");
            const fs::path path = dir("scenarios") / (id + ".json");
            if (!fs::exists(path)) fail(404, "not_found", "no scenario '" + id + "'");
            check_if_match(req, read_file(path), id);
            fs::remove(path);
            res.status = 204;
        }));

        server.Get("/workbooks", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json out = Json::array();
            for (const auto& name : list_ids("workbooks"))
                out.push_back(json::parse(read_file(dir("workbooks") / (name + ".json")), "workbook metadata"));
            send_json(res, 200, out);
        }));
        server.Get(R"(/workbooks/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, workbook_meta(req.matches[1]));
        }));
        server.Post("/workbooks", guarded([this](const httplib::Request& req, httplib::Response& res) {
            upload_workbook(req, res);
        }));

        server.Get("/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json{{"run_ids", list_ids("runs")}});
        }));
        server.Post("/runs", guarded([this](const httplib::Request& req, httplib::Response& res) { start_run(req, res); }));
        server.Get(R"(/runs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const AnalysisRun run = load_run(req.matches[1]);
            GroupKey key = GroupKey::by_checker;
            if (req.has_param("group")) {
                const auto parsed = parse_group_key(req.get_param_value("group"));
                if (!parsed) fail(400, "invalid_group", "group must be by_cell, by_checker or by_workbook");
                key = *parsed;
            }
            FilterSpec filter;
            if (req.has_param("filter")) {
                try {
                    filter = parse_filter(req.get_param_value("filter"));
                } catch (const InvalidDocument& e) {
                    fail(400, "invalid_filter", e.what());
                }
            }
            ReportFormat format = ReportFormat::json;
            if (req.has_param("format")) {
                const auto parsed = parse_report_format(req.get_param_value("format"));
                if (!parsed) fail(400, "invalid_format", "format must be json or text");
                format = *parsed;
            }
            res.status = 200;
            res.set_content(serialize_report(build_report(run, key, filter), format),
                            format == ReportFormat::json ? "application/json" : "text/plain; charset=utf-8");
        }));

        server.Put(R"(/ratings/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            put_ratings(req, res);
        }));
        server.Get(R"(/ratings/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            workbook_meta(id);
            send_json(res, 200, json::to_json(load_ratings(id)));
        }));

        server.Get("/evaluation", guarded([this](const httplib::Request& req, httplib::Response& res) {
            evaluation(req, res);
        }));
    }

    void check_if_match(const httplib::Request& req, const std::optional<std::string>& current, const std::string& id) {
        if (req.has_header("If-Match")) {
            const std::string expected = req.get_header_value("If-Match");
            if (!current) fail(409, "conflict", "scenario '" + id + "' does not exist any more");
            if (expected != "*" && expected != etag_of(*current))
                fail(409, "conflict", "scenario '" + id + "' was changed by someone else");
        }
        if (req.has_header("If-None-Match") && req.get_header_value("If-None-Match") == "*" && current)
            fail(409, "conflict", "scenario '" + id + "' already exists");
    }

    void put_scenario(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (!valid_scenario_id(id))
            fail(400, "invalid_id", "scenario ids are 1-100 letters, digits, '.', '_' or '-' starting with a letter or digit");
        Scenario scenario;
        try {
            scenario = json::scenario_from_json(parse_body(req, "scenario"));
        } catch (const InvalidDocument& e) {
            fail(400, "invalid_document", e.what());
        }
        if (const auto issues = validate_scenario(scenario); !issues.empty()) {
            HttpError e{400, "invalid_scenario", issues.front().message};
            e.issues = json::to_json(issues);
            throw e;
        }

        ScenarioLock lock(scenario_mutex(id), dir("scenarios") / ("." + id + ".lock"));
        if (!lock.held()) fail(409, "conflict", "scenario '" + id + "' is being written concurrently");
        const fs::path path = dir("scenarios") / (id + ".json");
        const auto current = read_optional(path);
        check_if_match(req, current, id);
        const std::string text = json::dump_scenario(scenario);
        write_file_atomic(path, text);
        res.set_header("ETag", etag_of(text));
        res.status = current ? 200 : 201;
        res.set_content(text, "application/json");
    }

    void upload_workbook(const httplib::Request& req, httplib::Response& res) {
        std::string filename;
        std::string content;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) fail(400, "missing_file", "multipart upload needs a 'file' part");
            const auto part = req.get_file_value("file");
            filename = part.filename;
            content = part.content;
        } else {
            filename = req.get_param_value("filename");
            content = req.body;
        }
        if (filename.empty()) fail(400, "missing_filename", "the upload needs a file name");
        if (filename.find('/') != std::string::npos || filename.find('\\') != std::string::npos)
            filename = fs::path(filename).filename().string();
        if (content.size() > options.max_upload)
            fail(413, "too_large", "workbook exceeds the upload limit of " + std::to_string(options.max_upload) + " bytes");

        Workbook book;
        try {
            book = read_workbook(content, filename);
        } catch (const Error& e) {
            fail(400, "invalid_workbook", e.what());
        }
        Json meta{{"workbook_id", book.id},
                  {"filename", filename},
                  {"bytes", content.size()},
                  {"digest", detail::Fingerprint().add(content).hex()},
                  {"sheets", Json::array()},
                  {"formulas", book.formula_count()}};
        for (const auto& s : book.sheets) meta["sheets"].push_back(s.name);

        std::lock_guard guard(upload_mutex);
        const std::string name = slug(book.id);
        const bool existed = fs::exists(dir("workbooks") / (name + ".json"));
        write_file_atomic(dir("workbooks") / (name + ".data"), content);
        write_file_atomic(dir("workbooks") / (name + ".json"), meta.dump(2) + "\n");
        send_json(res, existed ? 200 : 201, meta);
    }

    void start_run(const httplib::Request& req, httplib::Response& res) {
        const Json body = parse_body(req, "run request");
        if (!body.is_object() || !body.contains("scenario_id") || !body["scenario_id"].is_string() ||
            !body.contains("workbook_ids") || !body["workbook_ids"].is_array())
            fail(400, "invalid_document", "expected {\"scenario_id\": string, \"workbook_ids\": [string, ...]}");
        for (const auto& [key, value] : body.items()) {
            if (key != "scenario_id" && key != "workbook_ids")
                fail(400, "invalid_document", "unknown key '" + key + "' in run request");
        }
        const std::string scenario_id = body["scenario_id"].get<std::string>();
        if (!valid_scenario_id(scenario_id)) fail(404, "not_found", "no scenario '" + scenario_id + "'");
        const Scenario scenario = load_scenario(scenario_id);
        std::vector<Workbook> books;
        for (const auto& id : body["workbook_ids"]) {
            if (!id.is_string()) fail(400, "invalid_document", "workbook_ids must hold strings");
            books.push_back(load_workbook_by_id(id.get<std::string>()));
        }
        if (books.empty()) fail(400, "invalid_document", "workbook_ids must not be empty");

        AnalysisRun run;
        analysis_slots.acquire();
        try {
            run = run_scenario(scenario, books);
        } catch (const InvalidScenario& e) {
            analysis_slots.release();
            HttpError err{400, "invalid_scenario", e.what()};
            err.issues = json::to_json(e.issues());
            throw err;
        } catch (const Error& e) {
            analysis_slots.release();
            fail(400, "invalid_run", e.what());
        } catch (...) {
            analysis_slots.release();
            throw;
        }
        analysis_slots.release();

        write_file_atomic(dir("runs") / (run.run_id + ".json"), serialize_report(build_report(run), ReportFormat::json));
        send_json(res, 201, Json{{"run_id", run.run_id}, {"findings", run.findings.size()}});
    }

    void put_ratings(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const Json meta = workbook_meta(id);
        std::vector<ExpertRating> ratings;
        try {
            ratings = json::ratings_from_json(parse_body(req, "ratings"));
        } catch (const InvalidDocument& e) {
            fail(400, "invalid_document", e.what());
        }
        for (const auto& r : ratings) {
            if (r.workbook_id != id)
                fail(400, "invalid_document", "rating by '" + r.expert_id + "' names workbook '" + r.workbook_id +
                                                  "' but was sent for '" + id + "'");
        }
        // Resolve the logged cells against the workbook's sheets now rather
        // than at evaluation time.
        AnalysisRun probe;
        probe.workbooks.push_back(WorkbookSummary{id, meta.at("sheets").get<std::vector<std::string>>()});
        try {
            match_error_cells(probe, ratings);
        } catch (const NoErrorCells&) {
        } catch (const MalformedErrorCell& e) {
            fail(400, "malformed_error_cell", e.what());
        }
        const fs::path path = dir("ratings") / (slug(id) + ".json");
        const bool existed = fs::exists(path);
        const Json doc = json::to_json(ratings);
        write_file_atomic(path, doc.dump(2) + "\n");
        send_json(res, existed ? 200 : 201, doc);
    }

    void evaluation(const httplib::Request& req, httplib::Response& res) {
        const auto ids = split_ids(req.get_param_value("run_ids"));
        if (ids.empty()) fail(400, "invalid_request", "run_ids must name at least one run");
        std::vector<AnalysisRun> runs;
        std::vector<ExpertRating> ratings;
        for (const auto& id : ids) runs.push_back(load_run(id));
        std::set<std::string> seen;
        for (const auto& run : runs) {
            for (const auto& w : run.workbooks) {
                if (!seen.insert(w.id).second) continue;
                for (auto& r : load_ratings(w.id)) ratings.push_back(std::move(r));
            }
        }
        EvaluationResult result;
        try {
            result = evaluate_rules(runs, ratings);
        } catch (const UnratedWorkbook& e) {
            fail(400, "unrated_workbook", e.what());
        } catch (const ScenarioMismatch& e) {
            fail(400, "scenario_mismatch", e.what());
        } catch (const RatingWithoutRun& e) {
            fail(400, "rating_without_run", e.what());
        } catch (const MalformedErrorCell& e) {
            fail(400, "malformed_error_cell", e.what());
        } catch (const EvaluationError& e) {
            fail(400, "invalid_evaluation", e.what());
        }
        if (req.get_param_value("format") == "text") {
            res.status = 200;
            res.set_content(format_evaluation_text(result), "text/plain; charset=utf-8");
            return;
        }
        send_json(res, 200, json::to_json(result));
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoFailure("cannot bind to " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw IoFailure("cannot bind to " + host + ":" + std::to_string(port));
    return port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace sheetaudit
