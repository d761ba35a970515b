#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "pickling/advisor.hpp"
#include "pickling/pipeline.hpp"

namespace httplib {
class Server;
}

namespace pickling::app {

// An immutable set of loaded models. Requests hold a shared_ptr to one snapshot,
// so a reload never changes the models under a running request.
struct Snapshot {
    ModelBundle models;
    advisor::ScanGrid grid;
    std::string source;  // model directory it was loaded from
};

class ModelStore {
public:
    std::shared_ptr<const Snapshot> get() const;
    void set(std::shared_ptr<const Snapshot> snapshot);

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const Snapshot> current_;
};

struct Response {
    int status = 200;
    std::string body;  // JSON
};

class Service {
public:
    Service(std::string model_dir, advisor::ScanGrid grid);

    // Loads the model directory into a new snapshot; the old one stays active on failure.
    void reload();
    void install(ModelBundle models);

    // Transport-free request dispatch; the HTTP binding forwards here.
    Response handle(const std::string& method, const std::string& path, const std::string& body);

    // Registers the /api routes and, when static_dir is non-empty, serves it at "/".
    void bind(httplib::Server& server, const std::string& static_dir = "");

    const ModelStore& store() const noexcept { return store_; }

private:
    Response health() const;
    Response model() const;
    Response predict(const std::string& body) const;
    Response advise(const std::string& body) const;
    Response scan(const std::string& body) const;
    Response do_reload();

    std::string model_dir_;
    advisor::ScanGrid grid_;
    ModelStore store_;
    std::mutex reload_mutex_;
};

// Splits "host:port"; throws ConfigError on a malformed address.
std::pair<std::string, int> parse_bind(const std::string& address);

}  // namespace pickling::app
