#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "prefcone/http.hpp"
#include "prefcone/service.hpp"
#include "support/documents.hpp"

using namespace prefcone;
using namespace prefcone::service;
using namespace prefcone::testing;

namespace {

class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("prefcone-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

Request get(std::string path, std::multimap<std::string, std::string> query = {}) {
    return {"GET", std::move(path), std::move(query), std::nullopt, ""};
}

Request post(std::string path, const Json& body, std::optional<std::string> if_match = std::nullopt) {
    return {"POST", std::move(path), {}, std::move(if_match), body.dump()};
}

Request del(std::string path, std::multimap<std::string, std::string> query = {}) {
    return {"DELETE", std::move(path), std::move(query), std::nullopt, ""};
}

std::string create(SessionService& svc, const std::string& query = "") {
    Request req = post("/sessions", worked_doc());
    if (!query.empty()) req.query.emplace("additive_restriction", query);
    const auto r = svc.handle(req);
    EXPECT_EQ(r.status, 201) << r.body;
    return r.json()["id"];
}

std::string base(const std::string& id) { return "/sessions/" + id; }

}  // namespace

TEST(Service, CreateAndFetch) {
    SessionService svc;
    const auto r = svc.handle(post("/sessions", worked_doc()));
    ASSERT_EQ(r.status, 201);
    const auto id = r.json()["id"].get<std::string>();
    EXPECT_EQ(id.size(), 16u);
    EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
    EXPECT_EQ(r.json()["version"], 0);
    EXPECT_EQ(r.headers.at("ETag"), "\"0\"");

    const auto doc = svc.handle(get(base(id)));
    ASSERT_EQ(doc.status, 200);
    EXPECT_EQ(doc.json()["problem"], worked_doc());
    EXPECT_EQ(doc.json()["statements"], Json::array());
    EXPECT_FALSE(doc.json()["additive_restriction"].get<bool>());

    const auto additive = create(svc, "true");
    EXPECT_TRUE(svc.handle(get(base(additive))).json()["additive_restriction"].get<bool>());
}

TEST(Service, CreateRejectsBadInput) {
    SessionService svc;
    Json bad = worked_doc();
    bad["attributes"][1]["domain"] = Json::array({"0"});
    auto r = svc.handle(post("/sessions", bad));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(r.json()["pointer"].get<std::string>().rfind("/attributes/1", 0), 0u) << r.body;

    r = svc.handle({"POST", "/sessions", {}, std::nullopt, "{not json"});
    EXPECT_EQ(r.status, 422);

    Request req = post("/sessions", worked_doc());
    req.query.emplace("additive_restriction", "maybe");
    EXPECT_EQ(svc.handle(req).status, 422);
}

TEST(Service, RoutingErrors) {
    SessionService svc;
    const auto id = create(svc);
    EXPECT_EQ(svc.handle(get("/sessions/0000000000000000")).status, 404);
    EXPECT_EQ(svc.handle(get("/elsewhere")).status, 404);
    EXPECT_EQ(svc.handle(get("/sessions")).status, 405);
    EXPECT_EQ(svc.handle(del(base(id))).status, 405);
    EXPECT_EQ(svc.handle(post(base(id) + "/report", Json::object())).status, 405);
    EXPECT_EQ(svc.handle(get(base(id) + "/nothing")).status, 404);
    EXPECT_EQ(svc.handle(get(base(id) + "/statements")).status, 405);
}

TEST(Service, StatementLifecycle) {
    SessionService svc;
    const auto id = create(svc);
    const auto path = base(id) + "/statements";

    auto r = svc.handle(post(path, comparison_doc("a", "lottery", "x101")));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.json()["status"], "accepted");
    EXPECT_EQ(r.json()["version"], 1);
    EXPECT_EQ(r.json()["consistency"]["status"], "consistent");
    EXPECT_EQ(r.headers.at("ETag"), "\"1\"");

    r = svc.handle(post(path, comparison_doc("b", "x101", "lottery"), "\"0\""));
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(r.json()["version"], 1);

    Json bad = comparison_doc("c", "lottery", "nowhere");
    r = svc.handle(post(path, bad));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(r.json()["status"], "rejected");
    EXPECT_EQ(r.json()["pointer"], "/better/alternative");
    EXPECT_EQ(r.json()["version"], 1);

    r = svc.handle(post(path, comparison_doc("b", "x101", "lottery"), "\"1\""));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["status"], "warning_inconsistent");
    EXPECT_EQ(r.json()["consistency"]["conflict"], Json::array({"a", "b"}));

    const auto report = svc.handle(get(base(id) + "/report"));
    EXPECT_EQ(report.status, 200);
    EXPECT_EQ(report.json()["consistency"]["status"], "inconsistent");

    r = svc.handle(del(path + "/zzz"));
    EXPECT_EQ(r.status, 404);
    r = svc.handle(del(path + "/b"));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["status"], "removed");
    EXPECT_EQ(r.json()["version"], 3);
    EXPECT_EQ(r.json()["consistency"]["status"], "consistent");

    Request stale = del(path + "/a");
    stale.if_match = "\"2\"";
    EXPECT_EQ(svc.handle(stale).status, 409);
}

TEST(Service, WorkedReportAndUndo) {
    SessionService svc;
    const auto id = create(svc);
    ASSERT_EQ(svc.handle(post(base(id) + "/statements", cp_doc())).status, 200);
    auto r = svc.handle(get(base(id) + "/report"));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["alternatives"][1]["dominated_by"], Json::array({"x101"}));
    EXPECT_EQ(r.json()["alternatives"][0]["potentially_optimal"], true);
    EXPECT_EQ(r.json()["alternatives"][1]["potentially_optimal"], false);

    r = svc.handle(get(base(id) + "/cone"));
    EXPECT_EQ(r.json()["constraints"], 14);

    ASSERT_EQ(svc.handle(del(base(id) + "/statements/cp1")).status, 200);
    r = svc.handle(get(base(id) + "/report"));
    EXPECT_EQ(r.json()["alternatives"][1]["dominated_by"], Json::array());
    EXPECT_EQ(r.json()["pairs"][0]["verdict"], "incomparable");
}

// Indifference is two weak comparisons posted together; one version, one undo.
TEST(Service, IndifferenceAsPairedStatements) {
    SessionService svc;
    const auto id = create(svc);
    Json both = Json::array({comparison_doc("i1", "lottery", "x101", false), comparison_doc("i2", "x101", "lottery", false)});
    auto r = svc.handle(post(base(id) + "/statements", both));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.json()["version"], 1);
    r = svc.handle(get(base(id) + "/dominance", {{"p", "lottery"}, {"q", "x101"}}));
    EXPECT_EQ(r.json()["verdict"], "equivalent");

    r = svc.handle(del(base(id) + "/statements/i1", {{"also", "i2"}}));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["removed"], Json::array({"i1", "i2"}));
    EXPECT_EQ(r.json()["version"], 2);
    r = svc.handle(get(base(id) + "/dominance", {{"p", "lottery"}, {"q", "x101"}}));
    EXPECT_EQ(r.json()["verdict"], "incomparable");

    // A bad member rejects the whole batch.
    both[1]["better"]["alternative"] = "nowhere";
    r = svc.handle(post(base(id) + "/statements", both));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(r.json()["pointer"], "/1/better/alternative");
    EXPECT_EQ(svc.handle(get(base(id))).json()["statements"], Json::array());

    // Removing an unknown partner removes nothing.
    ASSERT_EQ(svc.handle(post(base(id) + "/statements", comparison_doc("k", "lottery", "x101"))).status, 200);
    EXPECT_EQ(svc.handle(del(base(id) + "/statements/k", {{"also", "ghost"}})).status, 404);
    EXPECT_EQ(svc.handle(get(base(id))).json()["statements"].size(), 1u);
}

TEST(Service, DominanceParameters) {
    SessionService svc;
    const auto id = create(svc);
    auto r = svc.handle(get(base(id) + "/dominance", {{"p", "lottery"}}));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(r.json()["pointer"], "q");
    r = svc.handle(get(base(id) + "/dominance", {{"p", "lottery"}, {"q", "nowhere"}}));
    EXPECT_EQ(r.status, 404);
    r = svc.handle(get(base(id) + "/dominance", {{"p", "lottery"}, {"q", "x101"}}));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["verdict"], "incomparable");
    EXPECT_FALSE(r.json()["witnesses"]["first_preferred"].is_null());
    EXPECT_FALSE(r.json()["witnesses"]["second_preferred"].is_null());
}

TEST(Service, SuggestHonoursSkip) {
    SessionService svc;
    const auto id = create(svc);
    auto r = svc.handle(get(base(id) + "/suggest"));
    ASSERT_EQ(r.status, 200);
    const auto first = r.json()["query"];
    ASSERT_FALSE(first.is_null());
    const std::string encoding = first["encoding"];

    r = svc.handle(get(base(id) + "/suggest", {{"skip", encoding}}));
    const auto second = r.json()["query"];
    if (!second.is_null()) EXPECT_NE(second["encoding"], encoding);

    // Answering the suggestion is an ordinary statement post.
    r = svc.handle(post(base(id) + "/statements", first["statement"]));
    EXPECT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.json()["version"], 1);
}

TEST(Service, SlowReportIsPolled) {
    SessionService svc({{}, kDefaultGeneratorCap, std::chrono::milliseconds(0)});
    const auto id = create(svc);
    ASSERT_EQ(svc.handle(post(base(id) + "/statements", cp_doc())).status, 200);
    auto r = svc.handle(get(base(id) + "/report"));
    int polls = 0;
    while (r.status == 202 && polls++ < 500) {
        EXPECT_EQ(r.json()["status"], "pending");
        EXPECT_EQ(r.headers.at("Retry-After"), "1");
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        r = svc.handle(get(base(id) + "/report"));
    }
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.json()["alternatives"][1]["dominated_by"], Json::array({"x101"}));
}

TEST(Service, PersistsAndReloads) {
    TempDir dir;
    std::string id;
    std::string before;
    {
        SessionService svc({dir.path()});
        id = create(svc);
        ASSERT_EQ(svc.handle(post(base(id) + "/statements", cp_doc())).status, 200);
        before = svc.handle(get(base(id) + "/report")).body;
    }
    EXPECT_TRUE(std::filesystem::exists(dir.path() / (id + kSessionExtension)));
    EXPECT_FALSE(std::filesystem::exists(dir.path() / (id + kSessionExtension + std::string(".tmp"))));
    std::ofstream(dir.path() / ("broken" + std::string(kSessionExtension))) << "{\"schema_version\": 9}";

    SessionService again({dir.path()});
    ASSERT_EQ(again.load_errors().size(), 1u);
    EXPECT_EQ(again.load_errors()[0].first, "broken.mlsess.json");
    const auto doc = again.handle(get(base(id)));
    ASSERT_EQ(doc.status, 200);
    EXPECT_EQ(doc.json()["version"], 1);
    EXPECT_EQ(again.handle(get(base(id) + "/report")).body, before);
}

TEST(Service, ConcurrentSessionsAndWriters) {
    SessionService svc;
    const auto shared = create(svc);
    constexpr int kThreads = 8, kPerThread = 5;
    std::atomic<int> failures{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t)
        threads.emplace_back([&, t] {
            const auto own = create(svc);
            for (int i = 0; i < kPerThread; ++i) {
                const auto sid = "t" + std::to_string(t) + "-" + std::to_string(i);
                if (svc.handle(post(base(shared) + "/statements", comparison_doc(sid, "lottery", "x101", false))).status != 200)
                    ++failures;
                if (svc.handle(get(base(shared) + "/report")).status != 200) ++failures;
            }
            if (svc.handle(post(base(own) + "/statements", cp_doc())).status != 200) ++failures;
            if (svc.handle(get(base(own) + "/report")).json()["alternatives"][1]["dominated_by"] != Json::array({"x101"}))
                ++failures;
        });
    for (auto& th : threads) th.join();
    EXPECT_EQ(failures.load(), 0);
    const auto doc = svc.handle(get(base(shared))).json();
    EXPECT_EQ(doc["version"], kThreads * kPerThread);
    EXPECT_EQ(doc["statements"].size(), static_cast<std::size_t>(kThreads * kPerThread));
}

TEST(Service, OverHttp) {
    SessionService svc;
    httplib::Server server;
    bind(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread loop([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto created = client.Post("/sessions", worked_doc().dump(), "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const std::string id = Json::parse(created->body)["id"];

    auto stale = client.Post("/sessions/" + id + "/statements", httplib::Headers{{"If-Match", "\"5\""}},
                             cp_doc().dump(), "application/json");
    ASSERT_TRUE(stale);
    EXPECT_EQ(stale->status, 409);

    auto added = client.Post("/sessions/" + id + "/statements", cp_doc().dump(), "application/json");
    ASSERT_TRUE(added);
    EXPECT_EQ(added->status, 200);
    EXPECT_EQ(added->get_header_value("ETag"), "\"1\"");

    auto dom = client.Get("/sessions/" + id + "/dominance?p=lottery&q=x101");
    ASSERT_TRUE(dom);
    EXPECT_EQ(Json::parse(dom->body)["verdict"], "preceq");

    auto removed = client.Delete("/sessions/" + id + "/statements/cp1");
    ASSERT_TRUE(removed);
    EXPECT_EQ(removed->status, 200);

    server.stop();
    loop.join();
}
