#include "apax/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include "httplib.h"

#include "apax/errors.hpp"
#include "apax/io.hpp"
#include "apax/report.hpp"

namespace apax::service {
namespace {

using Json = report::Json;

Response json_response(int status, const Json& j) { return {status, report::dump(j)}; }

Response error_response(int status, const std::string& message) {
    Json j;
    j["error"] = message;
    return json_response(status, j);
}

// Client-side problems with the request itself.
class BadRequest : public Error {
public:
    using Error::Error;
};

std::optional<double> parse_finite(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<double> parse_grid(const nlohmann::json& body) {
    if (!body.contains("grid") || body.at("grid").is_null()) return profiler::default_grid();
    const auto& g = body.at("grid");
    if (!g.is_array() || g.empty() || g.size() > 1000) throw BadRequest("grid must be a non-empty array of SRR targets");
    std::vector<double> out;
    for (const auto& v : g) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) throw BadRequest("grid values must be finite numbers");
        out.push_back(v.get<double>());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double Session::grid_step() const {
    double step = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = grid[i] - grid[i - 1];
        if (step == 0.0 || d < step) step = d;
    }
    return step > 0.0 ? step : 5.0;
}

bool Session::accepts(double srr_target) const {
    if (grid.empty() || !std::isfinite(srr_target)) return false;
    const double step = grid_step();
    return srr_target >= grid.front() - step && srr_target <= grid.back() + step;
}

SessionStore::SessionStore(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

std::string SessionStore::next_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%04llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(++counter_ & 0xffff));
    return buf;
}

std::shared_ptr<Session> SessionStore::insert(std::shared_ptr<Session> s) {
    std::lock_guard lock(mu_);
    do {
        s->id = next_id();
    } while (map_.count(s->id));
    lru_.push_front(s->id);
    map_.emplace(s->id, std::make_pair(s, lru_.begin()));
    while (map_.size() > capacity_) {
        map_.erase(lru_.back());
        lru_.pop_back();
    }
    return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = map_.find(id);
    if (it == map_.end()) return nullptr;
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
}

bool SessionStore::erase(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = map_.find(id);
    if (it == map_.end()) return false;
    lru_.erase(it->second.second);
    map_.erase(it);
    return true;
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mu_);
    return map_.size();
}

// ---------------------------------------------------------------------------

Service::Service(ServiceConfig config)
    : config_(std::move(config)), store_(config_.max_sessions), server_(std::make_unique<httplib::Server>()) {
    config_.profile.workers = config_.sweep_workers;
    install_routes();
}

Service::~Service() { stop(); }

Response Service::create_session(const std::string& body) {
    std::string dataset;
    SampleArray samples;
    std::vector<double> grid;
    try {
        const auto j = nlohmann::json::parse(body);
        if (!j.is_object() || !j.contains("source") || !j.at("source").is_object()) {
            throw BadRequest("body must be an object with a 'source'");
        }
        const auto& src = j.at("source");
        if (src.contains("synth") == src.contains("raw")) throw BadRequest("source needs exactly one of 'synth' or 'raw'");
        grid = parse_grid(j);

        if (src.contains("synth")) {
            const auto spec = io::synth_spec_from_json(src.at("synth"));
            spec.validate();
            if (spec.length * spec.dtype.width_bytes() > config_.max_dataset_bytes) {
                throw BadRequest("dataset exceeds the configured size limit");
            }
            dataset = spec.name;
            samples = io::synth(spec);
        } else {
            const auto spec = io::raw_spec_from_json(src.at("raw"), config_.corpus_dir);
            dataset = spec.path.filename().string();
            std::error_code ec;
            const auto bytes = std::filesystem::file_size(spec.path, ec);
            if (!ec && bytes > config_.max_dataset_bytes) {
                return error_response(422, "dataset exceeds the configured size limit");
            }
            samples = io::read_raw(spec);
        }
    } catch (const nlohmann::json::exception& e) {
        return error_response(400, std::string("invalid JSON: ") + e.what());
    } catch (const BadRequest& e) {
        return error_response(400, e.what());
    } catch (const InvalidSpec& e) {
        return error_response(400, e.what());
    } catch (const InvalidConfig& e) {
        return error_response(400, e.what());
    } catch (const Error& e) {
        return error_response(422, e.what());
    }

    auto session = std::make_shared<Session>();
    session->grid = grid;
    try {
        session->profile = std::make_unique<profiler::ProfileSession>(dataset, std::move(samples), config_.profile);
        session->profile->run(grid);
    } catch (const NoData& e) {
        return error_response(422, e.what());
    } catch (const UndefinedCorrelation& e) {
        return error_response(422, e.what());
    } catch (const UnsupportedValue& e) {
        return error_response(422, e.what());
    }
    store_.insert(session);

    const auto& p = *session->profile;
    Json out;
    out["id"] = session->id;
    out["dataset"] = p.dataset();
    out["dtype"] = std::string(p.input().dtype.name());
    out["element_count"] = p.input().values.size();
    out["grid"] = grid;
    out["curve"] = report::curve_json(p.curve());
    out["warnings"] = p.curve().warnings;
    out["recommended"] = report::recommended_json(p.recommended());
    return json_response(200, out);
}

Response Service::get_curve(const std::string& id) {
    const auto s = store_.find(id);
    if (!s) return error_response(404, "unknown session");
    const auto& p = *s->profile;
    Json out;
    out["id"] = s->id;
    out["curve"] = report::curve_json(p.curve());
    out["warnings"] = p.curve().warnings;
    out["recommended"] = report::recommended_json(p.recommended());
    return json_response(200, out);
}

Response Service::get_windows(const std::string& id, const std::optional<std::string>& srr_target) {
    const auto s = store_.find(id);
    if (!s) return error_response(404, "unknown session");
    if (!srr_target) return error_response(400, "missing srr_target");
    const auto t = parse_finite(*srr_target);
    if (!t) return error_response(400, "srr_target must be a finite number");
    if (!s->accepts(*t)) return error_response(400, "srr_target outside the swept range");
    try {
        return json_response(200, report::windows_json(*s->profile->windows(*t)));
    } catch (const UndefinedCorrelation& e) {
        return error_response(422, e.what());
    }
}

Response Service::delete_session(const std::string& id) {
    if (!store_.erase(id)) return error_response(404, "unknown session");
    return {204, ""};
}

// ---------------------------------------------------------------------------

void Service::install_routes() {
    auto& svr = *server_;
    const std::size_t threads = std::max<std::size_t>(1, config_.http_threads);
    svr.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    svr.set_payload_max_length(1 << 20);
    svr.set_default_headers({
        {"Access-Control-Allow-Origin", config_.cors_origin},
        {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
    });

    auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        if (!r.body.empty()) res.set_content(r.body, "application/json");
    };
    auto guarded = [send](auto fn) {
        return [send, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                send(res, fn(req));
            } catch (const std::exception& e) {
                send(res, error_response(500, e.what()));
            }
        };
    };

    svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    svr.Post("/sessions", guarded([this](const httplib::Request& req) { return create_session(req.body); }));
    svr.Get(R"(/sessions/([^/]+)/curve)",
            guarded([this](const httplib::Request& req) { return get_curve(req.matches[1]); }));
    svr.Get(R"(/sessions/([^/]+)/windows)", guarded([this](const httplib::Request& req) {
                std::optional<std::string> t;
                if (req.has_param("srr_target")) t = req.get_param_value("srr_target");
                return get_windows(req.matches[1], t);
            }));
    svr.Delete(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req) { return delete_session(req.matches[1]); }));

    if (config_.ui_dir) svr.set_mount_point("/", config_.ui_dir->string());
}

int Service::bind() {
    if (config_.port == 0) return server_->bind_to_any_port(config_.host);
    return server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() {
    if (server_ && server_->is_running()) server_->stop();
}

}  // namespace apax::service
