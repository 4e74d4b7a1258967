#include "doctest.h"

#include "missionscope/error.hpp"
#include "missionscope/evidence.hpp"
#include "missionscope/io.hpp"

#include "random_graphs.hpp"
#include "uav_fixture.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <regex>
#include <set>

using namespace missionscope;
using namespace missionscope::evidence;

namespace {

std::set<std::string> ids_of(const std::vector<Candidate>& cs) {
    std::set<std::string> out;
    for (const auto& c : cs) out.insert(c.attack_id);
    return out;
}

std::set<std::string> token_set(std::string_view text) {
    const auto t = tokenize(text);
    return {t.begin(), t.end()};
}

// |D ∩ A| / |D ∪ A| for unit weights.
double jaccard(const std::set<std::string>& d, const std::set<std::string>& a) {
    std::vector<std::string> inter, uni;
    std::set_intersection(d.begin(), d.end(), a.begin(), a.end(), std::back_inserter(inter));
    std::set_union(d.begin(), d.end(), a.begin(), a.end(), std::back_inserter(uni));
    return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::size_t binomial(std::size_t n, std::size_t r) {
    if (r > n) return 0;
    std::size_t out = 1;
    for (std::size_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
    return out;
}

const CandidateIndex& candidates_of(const mstest::UavFixture& u) { return u.candidates; }

} // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("The ZigBee IEEE 802.15.4 driver") ==
          std::vector<std::string>{"15", "802", "driver", "ieee", "zigbee"});
    CHECK(tokenize("a b c").empty());
    CHECK(tokenize("I2C  i2c I2C-bus") == std::vector<std::string>{"bus", "i2c"});
    CHECK(tokenize("matériel") == std::vector<std::string>{"matériel"});
    CHECK(tokenize("").empty());
}

TEST_CASE("match config parsing") {
    const auto cfg = parse_match_config(R"({"min_score":0.1,"max_candidates":5,"token_weights":{"property":2}})");
    CHECK(cfg.min_score == doctest::Approx(0.1));
    CHECK(cfg.max_candidates == 5);
    CHECK(cfg.weight(graph::DescriptorCategory::Property) == doctest::Approx(2.0));
    CHECK(cfg.weight(graph::DescriptorCategory::Functionality) == doctest::Approx(1.0));
    CHECK(parse_match_config(write_match_config(cfg)).token_weights == cfg.token_weights);

    CHECK_THROWS_AS(parse_match_config(R"({"threshold":1})"), ConfigError);
    CHECK_THROWS_AS(parse_match_config(R"({"min_score":2})"), ConfigError);
    CHECK_THROWS_AS(parse_match_config(R"({"max_candidates":0})"), ConfigError);
    CHECK_THROWS_AS(parse_match_config(R"({"token_weights":{"colour":1}})"), ConfigError);
    CHECK_THROWS_AS(parse_match_config(R"({"token_weights":{"property":-1}})"), ConfigError);
    CHECK_THROWS_AS(parse_match_config("[]"), ConfigError);
}

TEST_CASE("empty descriptor set yields no evidence") {
    const auto u = mstest::load_uav();
    graph::DescriptorSet empty{{graph::ElementType::Vertex, "X"}, "ns", {}};
    CHECK(missionscope::evidence::evidence(empty, u.av, u.config).empty());
    graph::DescriptorSet stop_only{{graph::ElementType::Vertex, "X"}, "ns",
                                   {{graph::DescriptorCategory::Property, "k", "the of a"}}};
    CHECK(missionscope::evidence::evidence(stop_only, u.av, u.config).empty());
}

TEST_CASE("fixture candidates") {
    const auto u = mstest::load_uav();
    const auto& c = candidates_of(u);
    REQUIRE(c.count("GPS"));
    const auto gps = ids_of(c.at("GPS").candidates);
    CHECK(gps.count("CVE-2016-6788"));
    CHECK(gps.count("CVE-2016-3801"));
    CHECK(gps.count("CWE-264"));
    CHECK(gps.count("CAPEC-17"));
    REQUIRE(c.count("GoPro Hero5"));
    CHECK(ids_of(c.at("GoPro Hero5").candidates).count("CVE-2014-6433"));
    CHECK(c.size() == u.s.descriptors.size());
}

TEST_CASE("every CVE mentioning zigbee is a candidate of each XBee") {
    const auto u = mstest::load_uav();
    const std::regex word("\\bzigbee\\b", std::regex::icase);
    std::set<std::string> expected;
    for (const auto& e : u.ingest.entries) {
        if (e.source == vuln::Source::CVE && std::regex_search(e.description, word)) expected.insert(e.id);
    }
    REQUIRE_FALSE(expected.empty());
    for (const char* xbee : {"FCS XBee", "GCS XBee", "Imagery XBee"}) {
        const auto got = ids_of(u.candidates.at(xbee).candidates);
        for (const auto& id : expected) CHECK_MESSAGE(got.count(id), xbee << " misses " << id);
    }
}

TEST_CASE("scores match the Jaccard oracle without expansion") {
    const auto u = mstest::load_uav();
    auto cfg = u.config;
    cfg.expand_abstractions = false;
    cfg.max_candidates = 1000;
    for (const auto& d : u.s.descriptors) {
        std::set<std::string> dtok;
        for (const auto& e : d.entries) {
            const auto t = token_set(e.value);
            dtok.insert(t.begin(), t.end());
        }
        std::map<std::string, double> expected;
        for (const auto& e : u.ingest.entries) {
            const double s = jaccard(dtok, token_set(e.title + " " + e.description));
            if (s > 0.0) expected[e.id] = s;
        }
        const auto got = missionscope::evidence::evidence(d, u.av, cfg);
        CHECK(got.size() == expected.size());
        for (const auto& c : got) {
            REQUIRE(expected.count(c.attack_id));
            CHECK(c.score == doctest::Approx(expected[c.attack_id]));
            CHECK(c.score > 0.0);
            CHECK(c.score <= 1.0);
            CHECK(c.related_via.empty());
        }
        CHECK(std::is_sorted(got.begin(), got.end(), [](const Candidate& a, const Candidate& b) {
            return a.score != b.score ? a.score > b.score : a.attack_id < b.attack_id;
        }));
    }
}

TEST_CASE("expansion reaches classes of matched CVEs") {
    const auto u = mstest::load_uav();
    for (const auto& [component, cc] : u.candidates) {
        const auto ids = ids_of(cc.candidates);
        for (const auto& c : cc.candidates) {
            if (c.related_via.empty()) continue;
            CHECK(ids.count(c.related_via));
            CHECK(vuln::source_of_id(c.related_via) == vuln::Source::CVE);
        }
    }
}

TEST_CASE("min_score and max_candidates bound the result") {
    const auto u = mstest::load_uav();
    const auto* gps = u.s.descriptors_of({graph::ElementType::Vertex, "GPS"});
    REQUIRE(gps);
    auto cfg = u.config;
    cfg.max_candidates = 2;
    CHECK(missionscope::evidence::evidence(*gps, u.av, cfg).size() == 2);
    cfg.max_candidates = 50;
    cfg.min_score = 0.2;
    for (const auto& c : missionscope::evidence::evidence(*gps, u.av, cfg)) CHECK(c.score >= 0.2);
}

TEST_CASE("matching is deterministic") {
    const auto a = mstest::load_uav();
    const auto b = mstest::load_uav();
    for (const auto& [component, cc] : a.candidates) CHECK(cc.candidates == b.candidates.at(component).candidates);
}

TEST_CASE("decisions") {
    CHECK(parse_decision("relevant") == Decision::Relevant);
    CHECK(parse_decision("irrelevant") == Decision::Irrelevant);
    CHECK_THROWS_AS(parse_decision("maybe"), DomainError);
}

TEST_CASE("triage errors") {
    auto u = mstest::load_uav();
    TriageLedger ledger;
    CHECK_THROWS_AS(record_triage(ledger, u.candidates, "GPS", "CVE-2016-6788", "yes", "a", "r"), DomainError);
    CHECK_THROWS_AS(record_triage(ledger, u.candidates, "GPS", "CVE-1999-0001", "relevant", "a", "r"), TriageError);
    CHECK_THROWS_AS(record_triage(ledger, u.candidates, "Rotor", "CVE-2016-6788", "relevant", "a", "r"), TriageError);
    CHECK(ledger.entries().empty());
}

TEST_CASE("last decision wins") {
    auto u = mstest::load_uav();
    TriageLedger ledger;
    CHECK(ledger.status("GPS", "CVE-2016-6788") == Status::Candidate);
    record_triage(ledger, u.candidates, "GPS", "CVE-2016-6788", "relevant", "a", "r", "2018-03-12T10:00:00Z");
    CHECK(ledger.status("GPS", "CVE-2016-6788") == Status::Relevant);
    record_triage(ledger, u.candidates, "GPS", "CVE-2016-6788", "irrelevant", "b", "r", "2018-03-12T10:01:00Z");
    CHECK(ledger.status("GPS", "CVE-2016-6788") == Status::Irrelevant);
    CHECK(ledger.entries().size() == 2);
    CHECK(rel_evidence("GPS", u.s, u.candidates, ledger, 2).base.empty());
}

TEST_CASE("ledger parse errors carry the line") {
    const auto good = TriageLedger::serialize(
        {"2018-03-12T09:00:00Z", "a", "GPS", "CVE-2016-6788", Decision::Relevant, "r"});
    CHECK(TriageLedger::parse(good + "\n\n" + good + "\n").entries().size() == 2);
    try {
        TriageLedger::parse(good + "\n{\"timestamp\":1}\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("combinations") {
    CHECK(enumerate_combinations({}, 2) == std::vector<Combination>{{}});
    const std::set<std::string> gps = {"CAPEC-17", "CVE-2016-3801", "CVE-2016-6788", "CWE-264"};
    const auto e = enumerate_combinations(gps, 2);
    const std::vector<Combination> expected = {
        {}, {"CAPEC-17"}, {"CVE-2016-3801"}, {"CVE-2016-6788"}, {"CWE-264"}, {"CVE-2016-3801", "CVE-2016-6788"}};
    CHECK(e == expected);
    CHECK(enumerate_combinations(gps, 1).size() == 5);
}

TEST_CASE("combination counts follow the binomial oracle") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t cves = std::uniform_int_distribution<std::size_t>(0, 7)(rng);
        const std::size_t others = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        std::set<std::string> base;
        for (std::size_t i = 0; i < cves; ++i) base.insert("CVE-2020-" + std::to_string(1000 + i));
        for (std::size_t i = 0; i < others; ++i) base.insert("CWE-" + std::to_string(i + 1));
        std::size_t expected = 1 + base.size();
        for (std::size_t r = 2; r <= k; ++r) expected += binomial(cves, r);
        const auto e = enumerate_combinations(base, k);
        CHECK(e.size() == expected);
        for (std::size_t i = 1; i < e.size(); ++i) {
            CHECK((e[i - 1].size() < e[i].size() || (e[i - 1].size() == e[i].size() && e[i - 1] < e[i])));
        }
    }
}

TEST_CASE("relevant evidence of the fixture") {
    const auto u = mstest::load_uav();
    const std::vector<std::string> gps = {"CAPEC-17", "CVE-2016-3801", "CVE-2016-6788", "CWE-264"};
    const std::vector<std::string> xbee = {"CAPEC-10", "CVE-2015-6244", "CVE-2015-8732", "CWE-20"};
    CHECK(u.relevant.at("GPS").base == gps);
    for (const char* x : {"FCS XBee", "GCS XBee", "Imagery XBee"}) CHECK(u.relevant.at(x).base == xbee);
    CHECK(u.relevant.at("FCS").base.empty());
    const auto& combos = u.relevant.at("GPS").combinations;
    CHECK(std::find(combos.begin(), combos.end(), Combination{"CVE-2016-3801", "CVE-2016-6788"}) != combos.end());
}

TEST_CASE("rel_evidence warnings") {
    const auto u = mstest::load_uav();
    const auto none = rel_evidence("Control Surfaces", u.s, u.candidates, u.ledger, 2);
    CHECK(none.base.empty());
    CHECK(none.combinations == std::vector<Combination>{{}});
    CHECK_FALSE(none.warnings.empty());

    auto ledger = u.ledger;
    ledger.append({"2018-03-12T11:00:00Z", "a", "GPS", "CAPEC-999", Decision::Relevant, "stale"});
    const auto gps = rel_evidence("GPS", u.s, u.candidates, ledger, 2);
    CHECK(gps.base == u.relevant.at("GPS").base);
    CHECK(gps.warnings.size() == 1);
}

TEST_CASE("evidence is sound and monotone in relevant decisions") {
    const auto u = mstest::load_uav();
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        TriageLedger ledger;
        std::size_t prev = 0;
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& [component, cc] : u.candidates) {
            for (const auto& c : cc.candidates) pairs.push_back({component, c.attack_id});
        }
        std::shuffle(pairs.begin(), pairs.end(), rng);
        pairs.resize(std::min<std::size_t>(pairs.size(), 12));
        for (const auto& [component, attack] : pairs) {
            record_triage(ledger, u.candidates, component, attack, "relevant", "t", "r", "2018-01-01T00:00:00Z");
            const auto rel = relevant_evidence(u.s, u.candidates, ledger, 2);
            std::size_t total = 0;
            for (const auto& [comp, e] : rel) {
                total += e.base.size();
                const auto cands = ids_of(u.candidates.at(comp).candidates);
                for (const auto& id : e.base) CHECK(cands.count(id));
            }
            CHECK(total == prev + 1);
            prev = total;
        }
    }
}

TEST_CASE("ledger appends reach the file") {
    mstest::TempWorkspace ws("ledger");
    const auto path = ws.root() / "fresh.jsonl";
    {
        auto ledger = TriageLedger::open(path);
        CHECK(ledger.entries().empty());
        const auto u = mstest::load_uav();
        record_triage(ledger, u.candidates, "GPS", "CVE-2016-6788", "relevant", "a", "r");
        record_triage(ledger, u.candidates, "GPS", "CVE-2016-3801", "irrelevant", "a", "r");
    }
    const auto reread = TriageLedger::open(path);
    REQUIRE(reread.entries().size() == 2);
    CHECK(reread.status("GPS", "CVE-2016-3801") == Status::Irrelevant);
    CHECK_FALSE(reread.entries()[0].timestamp.empty());
}
