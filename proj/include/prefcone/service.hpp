#pragma once

// Session service: routing, versioning and persistence over Session. Transport
// independent; tools/prefcone_server.cpp binds it to HTTP.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "prefcone/session.hpp"

namespace prefcone::service {

struct Config {
    std::filesystem::path data_dir;  ///< empty: sessions live in memory only
    std::size_t generator_cap = kDefaultGeneratorCap;
    /// Reports slower than this are answered 202 and finished in the background.
    std::chrono::milliseconds async_threshold{2000};
};

struct Request {
    std::string method;
    std::string path;
    std::multimap<std::string, std::string> query;
    std::optional<std::string> if_match;
    std::string body;

    std::optional<std::string> param(const std::string& key) const {
        auto it = query.find(key);
        if (it == query.end()) return std::nullopt;
        return it->second;
    }

    std::vector<std::string> params(const std::string& key) const {
        std::vector<std::string> out;
        for (auto [it, end] = query.equal_range(key); it != end; ++it) out.push_back(it->second);
        return out;
    }
};

struct Response {
    int status = 200;
    std::string body;
    std::map<std::string, std::string> headers;

    Json json() const { return Json::parse(body); }
};

inline constexpr const char* kSessionExtension = ".mlsess.json";

class SessionService {
  public:
    explicit SessionService(Config config = {}) : config_(std::move(config)) {
        std::random_device rd;
        rng_.seed((std::uint64_t{rd()} << 32) ^ rd());
        if (!config_.data_dir.empty()) load_all();
    }

    const Config& config() const { return config_; }

    /// Ids of sessions that could not be loaded from the data directory, with the reason.
    const std::vector<std::pair<std::string, std::string>>& load_errors() const { return load_errors_; }

    Response handle(const Request& req) {
        try {
            return route(req);
        } catch (const ValidationError& e) {
            return error(422, e.rule(), e.where());
        } catch (const std::exception& e) {
            return error(500, e.what());
        }
    }

  private:
    struct Entry {
        std::shared_mutex mutex;
        Session session;
        std::mutex jobs_mutex;
        std::map<std::uint64_t, std::shared_future<Json>> reports;

        explicit Entry(Session s) : session(std::move(s)) {}
    };

    static Response json_response(int status, const Json& j, std::optional<std::uint64_t> version = std::nullopt) {
        Response r{status, canonical_dump(j), {{"Content-Type", "application/json"}}};
        if (version) r.headers["ETag"] = "\"" + std::to_string(*version) + "\"";
        return r;
    }

    static Response error(int status, const std::string& message, const std::string& pointer = "") {
        Json j;
        j["error"] = message;
        if (!pointer.empty()) j["pointer"] = pointer;
        return json_response(status, j);
    }

    static std::vector<std::string> split_path(const std::string& path) {
        std::vector<std::string> out;
        std::stringstream ss(path);
        std::string part;
        while (std::getline(ss, part, '/'))
            if (!part.empty()) out.push_back(part);
        return out;
    }

    static std::optional<std::uint64_t> parse_version(std::string v) {
        if (v.starts_with("W/")) v = v.substr(2);
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
        return std::stoull(v);
    }

    Response route(const Request& req) {
        const auto parts = split_path(req.path);
        if (parts.empty() || parts[0] != "sessions") return error(404, "not found");
        if (parts.size() == 1) {
            if (req.method != "POST") return error(405, "method not allowed");
            return create(req);
        }
        auto entry = find(parts[1]);
        if (!entry) return error(404, "unknown session '" + parts[1] + "'");
        if (parts.size() == 2) {
            if (req.method != "GET") return error(405, "method not allowed");
            std::shared_lock lock(entry->mutex);
            return json_response(200, entry->session.to_json(), entry->session.version());
        }
        const std::string& what = parts[2];
        if (what == "statements") {
            if (parts.size() == 3 && req.method == "POST") return post_statements(*entry, req);
            if (parts.size() == 4 && req.method == "DELETE") return delete_statement(*entry, parts[3], req);
            return error(405, "method not allowed");
        }
        if (parts.size() != 3) return error(404, "not found");
        if (req.method != "GET") return error(405, "method not allowed");
        if (what == "report") return report(entry);
        if (what == "dominance") return dominance(*entry, req);
        if (what == "suggest") return suggest(*entry, req);
        if (what == "cone") return cone(*entry);
        return error(404, "not found");
    }

    std::shared_ptr<Entry> find(const std::string& id) {
        std::shared_lock lock(registry_mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::string new_id() {
        std::lock_guard lock(rng_mutex_);
        for (;;) {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
            std::shared_lock registry(registry_mutex_);
            if (!sessions_.contains(buf)) return buf;
        }
    }

    Response create(const Request& req) {
        const auto problem = problem_from_json(parse_json(req.body));
        const auto additive = req.param("additive_restriction");
        if (additive && *additive != "true" && *additive != "false")
            throw ValidationError("additive_restriction", "expected true or false");
        auto entry = std::make_shared<Entry>(Session(new_id(), problem, additive == "true"));
        persist(entry->session);
        {
            std::unique_lock lock(registry_mutex_);
            sessions_.emplace(entry->session.id(), entry);
        }
        Json j;
        j["id"] = entry->session.id();
        j["version"] = entry->session.version();
        return json_response(201, j, entry->session.version());
    }

    static std::optional<Response> precondition(const Session& s, const Request& req) {
        if (!req.if_match) return std::nullopt;
        const auto v = parse_version(*req.if_match);
        if (v && *v == s.version()) return std::nullopt;
        Json j;
        j["error"] = "version precondition failed";
        j["version"] = s.version();
        return json_response(409, j, s.version());
    }

    Response post_statements(Entry& entry, const Request& req) {
        const Json body = parse_json(req.body);
        std::unique_lock lock(entry.mutex);
        auto& s = entry.session;
        if (auto r = precondition(s, req)) return *r;
        const AddOutcome out = body.is_array() ? s.add_all(std::vector<Json>(body.begin(), body.end()))
                                               : s.add(body);
        Json j;
        j["status"] = to_string(out.status);
        if (out.status == AddStatus::Rejected) {
            j["reason"] = out.reason;
            j["pointer"] = out.pointer;
            j["version"] = s.version();
            return json_response(422, j, s.version());
        }
        persist(s);
        forget_reports(entry);
        j["version"] = out.version;
        j["consistency"] = consistency_json(s.feasibility());
        return json_response(200, j, out.version);
    }

    Response delete_statement(Entry& entry, const std::string& sid, const Request& req) {
        std::unique_lock lock(entry.mutex);
        auto& s = entry.session;
        if (auto r = precondition(s, req)) return *r;
        auto ids = req.params("also");
        ids.insert(ids.begin(), sid);
        if (!s.remove_all(ids)) return error(404, "unknown statement '" + sid + "'");
        persist(s);
        forget_reports(entry);
        Json j;
        j["status"] = "removed";
        j["removed"] = ids;
        j["version"] = s.version();
        j["consistency"] = consistency_json(s.feasibility());
        return json_response(200, j, s.version());
    }

    static void forget_reports(Entry& entry) {
        std::lock_guard lock(entry.jobs_mutex);
        entry.reports.clear();
    }

    Response report(const std::shared_ptr<Entry>& entry) {
        std::shared_future<Json> job;
        std::uint64_t version;
        {
            std::shared_lock lock(entry->mutex);
            version = entry->session.version();
            if (auto cached = entry->session.cached_report()) return json_response(200, *cached, version);
            std::lock_guard jobs(entry->jobs_mutex);
            auto it = entry->reports.find(version);
            if (it == entry->reports.end()) {
                // The snapshot is computed off the request path; writers are not held up.
                std::promise<Json> promise;
                job = promise.get_future().share();
                entry->reports.emplace(version, job);
                std::thread([snapshot = entry->session, promise = std::move(promise)]() mutable {
                    try {
                        promise.set_value(snapshot.report());
                    } catch (...) {
                        promise.set_exception(std::current_exception());
                    }
                }).detach();
            } else {
                job = it->second;
            }
        }
        if (job.wait_for(config_.async_threshold) != std::future_status::ready) {
            Json j = header_json(entry->session.id(), version);
            j["status"] = "pending";
            auto r = json_response(202, j, version);
            r.headers["Retry-After"] = "1";
            return r;
        }
        return json_response(200, job.get(), version);
    }

    Response dominance(Entry& entry, const Request& req) {
        const auto p = req.param("p"), q = req.param("q");
        if (!p || !q) throw ValidationError(p ? "q" : "p", "query parameters p and q are required");
        std::shared_lock lock(entry.mutex);
        const auto& s = entry.session;
        for (const auto* name : {&*p, &*q})
            if (!s.problem().find_alternative(*name)) return error(404, "unknown alternative '" + *name + "'");
        return json_response(200, s.dominance(*p, *q), s.version());
    }

    Response suggest(Entry& entry, const Request& req) {
        const auto skipped = req.params("skip");
        std::shared_lock lock(entry.mutex);
        const auto& s = entry.session;
        return json_response(200, s.suggestion({skipped.begin(), skipped.end()}), s.version());
    }

    Response cone(Entry& entry) {
        std::shared_lock lock(entry.mutex);
        const auto& s = entry.session;
        return json_response(200, s.cone_summary(config_.generator_cap), s.version());
    }

    /// Write-ahead to a temporary file, then rename over the session file.
    void persist(const Session& s) const {
        if (config_.data_dir.empty()) return;
        const auto target = config_.data_dir / (s.id() + kSessionExtension);
        auto tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << save_session(s);
            out.flush();
            if (!out) throw std::runtime_error("cannot write " + tmp.string());
        }
        std::filesystem::rename(tmp, target);
    }

    void load_all() {
        std::filesystem::create_directories(config_.data_dir);
        for (const auto& file : std::filesystem::directory_iterator(config_.data_dir)) {
            const auto name = file.path().filename().string();
            if (!name.ends_with(kSessionExtension)) continue;
            try {
                std::ifstream in(file.path(), std::ios::binary);
                std::stringstream buf;
                buf << in.rdbuf();
                auto s = load_session(buf.str());
                const std::string id = s.id();
                sessions_.emplace(id, std::make_shared<Entry>(std::move(s)));
            } catch (const std::exception& e) {
                load_errors_.emplace_back(name, e.what());
            }
        }
    }

    Config config_;
    std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
    std::vector<std::pair<std::string, std::string>> load_errors_;
};

}  // namespace prefcone::service
