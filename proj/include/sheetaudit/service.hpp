#pragma once

// HTTP+json front end over a workspace directory:
//
//   <root>/scenarios/<id>.json    scenario documents
//   <root>/workbooks/<slug>.json  upload metadata, bytes in <slug>.data
//   <root>/runs/<run_id>.json     full report of the run (schema_version 1)
//   <root>/ratings/<slug>.json    list of expert ratings of one workbook
//
// Every file is written through a temporary sibling and renamed into place.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace sheetaudit {

struct ServiceOptions {
    std::filesystem::path workspace = "workspace";
    std::size_t max_upload = 20u * 1024 * 1024;
    unsigned analysis_workers = 2;  ///< Runs executing at once; later requests wait.
    unsigned http_threads = 8;
};

/// Defaults overridden by WORKBENCH_WORKSPACE and WORKBENCH_MAX_UPLOAD.
ServiceOptions service_options_from_env();

/// WORKBENCH_PORT, else 8080.
int service_port_from_env();

class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds to host:port; port 0 picks a free one. Returns the bound port.
    /// Throws IoFailure.
    int bind(const std::string& host, int port);

    /// Serves until stop() is called.
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sheetaudit
