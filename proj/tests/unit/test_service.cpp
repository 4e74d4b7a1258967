#include "doctest.h"

#include "missionscope/error.hpp"
#include "missionscope/io.hpp"
#include "missionscope/service.hpp"
#include "missionscope/workspace.hpp"

#include "uav_fixture.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

using namespace missionscope;
using namespace missionscope::service;
using nlohmann::json;

namespace {

// Fixture copy with the derived artifacts (AV cache, S) in place.
struct PreparedWorkspace {
    mstest::TempWorkspace dir;
    Workspace ws;
    explicit PreparedWorkspace(const std::string& tag) : dir(tag), ws(dir.root()) {
        cmd_ingest(ws);
        cmd_compose(ws);
    }
};

ApiResponse get(MissionService& svc, const std::string& path, std::map<std::string, std::string> query = {}) {
    return svc.handle({"GET", path, std::move(query), ""});
}

ApiResponse triage(MissionService& svc, const std::string& component, const std::string& attack,
                   const std::string& decision) {
    const json body = {{"component", component}, {"attack_id", attack}, {"decision", decision},
                       {"analyst", "test"}, {"rationale", "unit test"}};
    return svc.handle({"POST", "/api/triage", {}, body.dump()});
}

bool has_chain_from(const json& report, const std::string& start) {
    for (const auto& c : report["chains"]) {
        if (c["vertices"][0] == start) return true;
    }
    return false;
}

} // namespace

TEST_CASE("workspace commands on the fixture") {
    mstest::TempWorkspace dir("cmds");
    Workspace ws(dir.root());
    CHECK_THROWS_AS(ws.load_graph(graph::GraphKind::Mission), PreconditionError);
    CHECK_FALSE(cmd_validate(ws).empty());

    const auto summary = cmd_ingest(ws);
    CHECK(summary.counts.at("CVE") == 6);
    CHECK(std::filesystem::exists(ws.ingest_summary_path()));
    const auto s = cmd_compose(ws);
    CHECK(s.vertices.size() == 22);
    CHECK(cmd_validate(ws).empty());

    const auto first = cmd_analyze(ws, 8, 2);
    const auto json_a = io::read_file(ws.report_json_path());
    const auto text_a = io::read_file(ws.report_text_path());
    cmd_analyze(ws, 8, 2);
    CHECK(io::read_file(ws.report_json_path()) == json_a);
    CHECK(io::read_file(ws.report_text_path()) == text_a);
    CHECK(first.report.chains.size() == 2);
    CHECK(first.report.traces.traces.size() == 14);
}

TEST_CASE("traces file round trip") {
    const auto u = mstest::load_uav();
    CHECK(parse_traces(write_traces(u.traces)) == u.traces);
    CHECK_THROWS(parse_traces("[{\"src\":1}]"));
}

TEST_CASE("service endpoints") {
    PreparedWorkspace p("svc");
    MissionService svc(p.ws, 8, 2);

    SUBCASE("components") {
        const auto r = get(svc, "/api/components");
        CHECK(r.status == 200);
        const auto doc = json::parse(r.body);
        std::set<std::string> ids;
        for (const auto& c : doc["components"]) ids.insert(c["id"]);
        CHECK(ids.count("GPS"));
        CHECK(ids.count("GoPro Hero5"));
        CHECK(ids.count("gps-i2c"));
    }
    SUBCASE("evidence with an encoded id") {
        const auto r = get(svc, "/api/evidence/GoPro%20Hero5");
        REQUIRE(r.status == 200);
        const auto doc = json::parse(r.body);
        CHECK(doc["component"] == "GoPro Hero5");
        CHECK(doc["relevant"].size() == 7);
        CHECK(doc["candidates"][0].contains("status"));
    }
    SUBCASE("unknown component") {
        const auto r = get(svc, "/api/evidence/Rotor");
        CHECK(r.status == 404);
        CHECK(json::parse(r.body)["error"]["code"] == "unknown-component");
    }
    SUBCASE("graphs") {
        CHECK(get(svc, "/api/graphs/S").status == 200);
        const auto gml = get(svc, "/api/graphs/Sigma", {{"format", "graphml"}});
        CHECK(gml.content_type == "application/graphml+xml");
        CHECK(graph::structurally_equal(graph::parse_graphml(gml.body, graph::GraphKind::Structure),
                                        p.ws.load_graph(graph::GraphKind::Structure)));
        CHECK(get(svc, "/api/graphs/Q").status == 404);
    }
    SUBCASE("triage validation") {
        CHECK(triage(svc, "GPS", "CVE-1999-0001", "relevant").status == 404);
        CHECK(json::parse(triage(svc, "GPS", "CVE-1999-0001", "relevant").body)["error"]["code"] ==
              "unknown-candidate");
        const auto bad = triage(svc, "GPS", "CVE-2016-6788", "perhaps");
        CHECK(bad.status == 422);
        CHECK(json::parse(bad.body)["error"]["code"] == "invalid-decision");
        CHECK(svc.handle({"POST", "/api/triage", {}, "not json"}).status == 400);
        CHECK(svc.handle({"DELETE", "/api/triage", {}, ""}).status == 404);
    }
    SUBCASE("impact matches the analyze command") {
        const auto r = get(svc, "/api/impact");
        CHECK(r.status == 200);
        cmd_analyze(p.ws, 8, 2);
        CHECK(r.body == io::read_file(p.ws.report_json_path()));
        CHECK(get(svc, "/api/report").body == io::read_file(p.ws.report_text_path()));
    }
    SUBCASE("placeholder page without a UI bundle") {
        const auto r = get(svc, "/");
        CHECK(r.status == 200);
        CHECK(r.content_type.find("text/html") == 0);
        CHECK(get(svc, "/nothing.js").status == 404);
    }
}

TEST_CASE("triage loop drives the GPS chain") {
    PreparedWorkspace p("loop");
    MissionService svc(p.ws, 8, 2);
    CHECK(has_chain_from(json::parse(get(svc, "/api/impact").body), "GPS"));
    for (const char* id : {"CVE-2016-6788", "CVE-2016-3801"}) CHECK(triage(svc, "gps-i2c", id, "irrelevant").status == 201);
    CHECK_FALSE(has_chain_from(json::parse(get(svc, "/api/impact").body), "GPS"));
    for (const char* id : {"CVE-2016-6788", "CVE-2016-3801"}) CHECK(triage(svc, "gps-i2c", id, "relevant").status == 201);
    CHECK(has_chain_from(json::parse(get(svc, "/api/impact").body), "GPS"));

    // decisions survive a restart
    triage(svc, "GPS", "CVE-2016-6788", "irrelevant");
    MissionService again(p.ws, 8, 2);
    const auto doc = json::parse(get(again, "/api/evidence/GPS").body);
    bool found = false;
    for (const auto& c : doc["candidates"]) {
        if (c["attack_id"] == "CVE-2016-6788") {
            CHECK(c["status"] == "irrelevant");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("missing S is a precondition failure") {
    mstest::TempWorkspace dir("nos");
    CHECK_THROWS_AS(MissionService(Workspace(dir.root()), 8, 2), PreconditionError);
}

TEST_CASE("HTTP smoke test") {
    PreparedWorkspace p("http");
    MissionService svc(p.ws, 8, 2);
    const int port = svc.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&] { svc.listen(); });
    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/api/components");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Post("/api/triage",
                      R"({"component":"GPS","attack_id":"CVE-2016-6788","decision":"relevant","analyst":"h","rationale":"r"})",
                      "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    res = client.Get("/api/evidence/GoPro%20Hero5");
    REQUIRE(res);
    CHECK(res->status == 200);
    svc.stop();
    server.join();
}
