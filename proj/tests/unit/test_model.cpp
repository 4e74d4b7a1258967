#include "doctest.h"

#include "missionscope/compose.hpp"
#include "missionscope/error.hpp"
#include "missionscope/stpa.hpp"

#include "uav_fixture.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>

using namespace missionscope;
using namespace missionscope::graph;
using nlohmann::json;

namespace {

std::size_t count_relation(const LabeledGraph& g, std::string_view relation) {
    return static_cast<std::size_t>(
        std::count_if(g.arrows.begin(), g.arrows.end(), [&](const Arrow& a) { return a.relation == relation; }));
}

json fixture_stpa() { return json::parse(io::read_file(mstest::fixture_dir() / "stpa.json")); }

bool has_invariant(const std::vector<Violation>& vs, std::string_view tag) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.invariant == tag; });
}

} // namespace

TEST_CASE("STPA fixture parses with the documented table sizes") {
    const auto u = mstest::load_uav();
    CHECK(u.stpa.losses.size() == 3);
    CHECK(u.stpa.hazards.size() == 3);
    const auto doc = stpa::documented_records(u.stpa);
    CHECK(doc.control_actions.size() == 3);
    CHECK(doc.safety_constraints.size() == 3);
    CHECK_NOTHROW(stpa::check_dataset(u.stpa));
}

TEST_CASE("requirements projection: one arrow per loss association") {
    const auto u = mstest::load_uav();
    const auto r = stpa::project_to_requirements(stpa::documented_records(u.stpa));
    CHECK(validate(r).empty());
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& a : r.arrows) {
        if (a.relation == stpa::kLossHazardRelation) got.insert({a.src, a.tgt});
    }
    const std::set<std::pair<std::string, std::string>> expected = {
        {"L1", "H1"}, {"L1", "H2"}, {"L2", "H3"}, {"L3", "H3"}};
    CHECK(got == expected);
    CHECK(r.find_vertex("L1")->attributes.at("priority") == "1");
}

TEST_CASE("function projection of the documented tables") {
    const auto u = mstest::load_uav();
    const auto proj = stpa::project_to_function(stpa::documented_records(u.stpa));
    CHECK(validate(proj.graph).empty());
    CHECK(count_relation(proj.graph, stpa::kConstrainsRelation) == 3);
    CHECK(count_relation(proj.graph, stpa::kRefinedByRelation) == 0);
    const auto* ca = proj.graph.find_vertex("CA4.3");
    REQUIRE(ca);
    CHECK(ca->kind == VertexKind::ControlAction);
    CHECK(ca->attributes.at("providing.hazards") == "H2,H3");

    const auto full = stpa::project_to_function(u.stpa);
    CHECK(count_relation(full.graph, stpa::kConstrainsRelation) == 5);
    CHECK(count_relation(full.graph, stpa::kRefinedByRelation) == 3);
}

TEST_CASE("projections are deterministic") {
    const auto u = mstest::load_uav();
    CHECK(write_graphml(stpa::project_to_requirements(u.stpa)) == write_graphml(stpa::project_to_requirements(u.stpa)));
    CHECK(write_graphml(stpa::project_to_function(u.stpa).graph) ==
          write_graphml(stpa::project_to_function(u.stpa).graph));
}

TEST_CASE("STPA dataset errors") {
    SUBCASE("not JSON") { CHECK_THROWS_AS(stpa::parse_stpa_tables("{"), FormatError); }
    SUBCASE("unknown loss") {
        auto d = fixture_stpa();
        d["hazards"][0]["associated_losses"] = {"L9"};
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), ReferenceError);
    }
    SUBCASE("duplicate hazard") {
        auto d = fixture_stpa();
        d["hazards"][1]["id"] = "H1";
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), DuplicateError);
    }
    SUBCASE("duplicate loss priority") {
        auto d = fixture_stpa();
        d["losses"][1]["priority"] = 1;
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), DuplicateError);
    }
    SUBCASE("control action citing an unknown hazard") {
        auto d = fixture_stpa();
        d["control_actions"][0]["providing"]["hazards"] = {"H7"};
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), ReferenceError);
    }
    SUBCASE("bad id shape") {
        auto d = fixture_stpa();
        d["safety_constraints"][0]["id"] = "SC-one";
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), FormatError);
    }
    SUBCASE("self refinement") {
        auto d = fixture_stpa();
        d["safety_constraints"][3]["refined_by"] = {d["safety_constraints"][3]["id"]};
        CHECK_THROWS_AS(stpa::parse_stpa_tables(d.dump()), ReferenceError);
    }
}

TEST_CASE("composition of the fixture") {
    const auto u = mstest::load_uav();
    CHECK(u.s.kind == GraphKind::Mission);
    CHECK(u.s.vertices.size() == 22);
    CHECK(u.s.arrows.size() == 24);
    CHECK(validate(u.s, {&u.r, &u.f, &u.sigma}).empty());

    std::size_t components = 0;
    for (const auto& v : u.s.vertices) components += v.kind == VertexKind::Component;
    std::size_t sigma_components = u.sigma.vertices.size();
    CHECK(components == 9);
    CHECK(components < sigma_components);

    // every descriptor set of S is verbatim in Sigma
    for (const auto& d : u.s.descriptors) {
        const auto* in_sigma = u.sigma.descriptors_of(d.owner);
        REQUIRE(in_sigma);
        CHECK(*in_sigma == d);
    }
    // arrows brought in verbatim keep their Sigma id
    CHECK(u.s.find_arrow("gps-i2c"));
    CHECK(u.s.find_arrow(trace_arrow_id({"CA3.1", "FCS", "allocated-to"})));
}

TEST_CASE("composition errors") {
    const auto u = mstest::load_uav();
    SUBCASE("unknown endpoint") {
        auto t = u.traces;
        t.push_back({"CA3.1", "Rotor", "allocated-to"});
        CHECK_THROWS_AS(compose_mission_spec(u.r, u.f, u.sigma, t), CompositionError);
    }
    SUBCASE("duplicate trace") {
        auto t = u.traces;
        t.push_back(t.front());
        CHECK_THROWS_AS(compose_mission_spec(u.r, u.f, u.sigma, t), CompositionError);
    }
    SUBCASE("upward trace") {
        auto t = u.traces;
        t.push_back({"FCS", "CA3.1", "realizes"});
        CHECK_THROWS_AS(compose_mission_spec(u.r, u.f, u.sigma, t), DirectionError);
    }
}

TEST_CASE("composition is monotone in the trace list") {
    const auto u = mstest::load_uav();
    for (std::size_t cut = 0; cut <= u.traces.size(); cut += 3) {
        const std::vector<TraceLink> fewer(u.traces.begin(), u.traces.begin() + static_cast<long>(cut));
        const auto small = compose_mission_spec(u.r, u.f, u.sigma, fewer);
        CHECK(validate(small, {&u.r, &u.f, &u.sigma}).empty());
        for (const auto& v : small.vertices) CHECK(u.s.find_vertex(v.id));
        for (const auto& a : small.arrows) CHECK(u.s.find_arrow(a.id));
    }
}

TEST_CASE("mission validation names composition violations") {
    const auto u = mstest::load_uav();
    const SourceGraphs sources{&u.r, &u.f, &u.sigma};
    SUBCASE("vertex outside every source") {
        auto s = u.s;
        s.vertices.push_back({"Rogue Radio", VertexKind::Component, "Rogue Radio", {}});
        CHECK(has_invariant(validate(s, sources), "vertex-subset"));
    }
    SUBCASE("descriptor not in Sigma") {
        auto s = u.s;
        auto it = std::find_if(s.descriptors.begin(), s.descriptors.end(),
                               [](const DescriptorSet& d) { return d.owner.id == "GPS"; });
        REQUIRE(it != s.descriptors.end());
        it->entries.push_back({DescriptorCategory::Property, "firmware", "patched"});
        CHECK(has_invariant(validate(s, sources), "descriptor-subset"));
    }
}
