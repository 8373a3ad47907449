#pragma once

// HTTP session service for the interactive profiler.
//
//   POST   /sessions                          {source, grid?} -> {id, curve, recommended, ...}
//   GET    /sessions/{id}/curve               -> {id, curve, warnings, recommended}
//   GET    /sessions/{id}/windows?srr_target= -> windows JSON
//   DELETE /sessions/{id}                     -> 204

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "apax/profiler.hpp"

namespace httplib {
class Server;
}

namespace apax::service {

inline constexpr int kDefaultPort = 8807;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = kDefaultPort;
    std::size_t max_sessions = 16;
    std::uint64_t max_dataset_bytes = 512ull << 20;
    std::size_t sweep_workers = 0;  // 0 = hardware concurrency
    std::size_t http_threads = 8;
    std::filesystem::path corpus_dir;            // base for relative raw paths
    std::optional<std::filesystem::path> ui_dir;  // static files mounted at /
    std::string cors_origin = "*";
    profiler::ProfileOptions profile;
};

struct Session {
    std::string id;
    std::vector<double> grid;
    std::unique_ptr<profiler::ProfileSession> profile;

    double grid_step() const;
    /// Swept range widened by one grid step on both sides.
    bool accepts(double srr_target) const;
};

/// Thread-safe in-memory session table with LRU eviction.
class SessionStore {
public:
    explicit SessionStore(std::size_t capacity);

    std::shared_ptr<Session> insert(std::shared_ptr<Session> s);
    std::shared_ptr<Session> find(const std::string& id);
    bool erase(const std::string& id);
    std::size_t size() const;

private:
    std::string next_id();

    mutable std::mutex mu_;
    std::size_t capacity_;
    std::uint64_t counter_ = 0;
    std::list<std::string> lru_;  // front = most recent
    std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> map_;
};

/// HTTP status plus JSON body; used by the routes and directly by tests.
struct Response {
    int status = 200;
    std::string body;
};

class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response create_session(const std::string& body);
    Response get_curve(const std::string& id);
    Response get_windows(const std::string& id, const std::optional<std::string>& srr_target);
    Response delete_session(const std::string& id);

    /// Binds to config.port (0 = ephemeral) and returns the bound port, or -1.
    int bind();
    /// Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();

    const SessionStore& sessions() const { return store_; }
    const ServiceConfig& config() const { return config_; }

private:
    void install_routes();

    ServiceConfig config_;
    SessionStore store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace apax::service
