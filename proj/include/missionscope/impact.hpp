#pragma once

#include "missionscope/evidence.hpp"
#include "missionscope/graph.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace missionscope::impact {

struct Hop {
    std::string arrow;
    // Alternative attacks that each attest the hop (a disjunction).
    std::vector<std::string> attack_set;

    auto operator<=>(const Hop&) const = default;
};

// A head-to-tail sequence in Sigma. Length 0 is the trivial path at `start`.
struct VulnerablePath {
    std::vector<std::string> vertices;  // start first; size = hops + 1
    std::vector<Hop> hops;

    const std::string& start() const { return vertices.front(); }
    std::size_t length() const { return hops.size(); }
    auto operator<=>(const VulnerablePath&) const = default;
};

// Disjoint union over lengths; sorted by (length, vertex sequence, arrows)
// and free of duplicates.
struct PathSet {
    std::vector<VulnerablePath> paths;

    std::vector<VulnerablePath> of_length(std::size_t n) const;
    bool empty() const noexcept { return paths.empty(); }
};

// Trivial paths for evidenced vertices plus every simple path of length
// 1..max_len whose arrows all carry relevant evidence. A hop's attack set is
// the CVEs relevant to its arrow, or all relevant ids when none is a CVE.
// Throws DomainError for max_len < 0.
PathSet find_vulnerable_paths(const graph::LabeledGraph& sigma, const evidence::RelevanceMap& relevant, long max_len);

// Attack chains: paths of length >= 1 that cannot be extended by one hop at
// either end within the set.
std::vector<VulnerablePath> maximal_chains(const PathSet& paths);

// Bottom-to-top walk in S: component first, loss last.
struct ImpactTrace {
    std::vector<std::string> vertices;
    std::vector<std::string> arrows;    // arrow i joins vertices[i + 1] -> vertices[i] as stored
    std::vector<std::string> origins;   // evidenced components this trace was lifted from

    std::size_t length() const { return arrows.size(); }
    const std::string& loss() const { return vertices.back(); }
    auto operator<=>(const ImpactTrace&) const = default;
};

struct TraceSet {
    std::vector<ImpactTrace> traces;        // sorted by (length, vertices)
    std::vector<std::string> untraced;      // evidenced vertices absent from S

    std::vector<ImpactTrace> of_length(std::size_t n) const;
};

// Origins are the trivial paths of `vulnerable`. Each origin is lifted to
// itself and every aggregate that contains it (reversed "contains" arrows),
// and from there every simple reversed path through behavior and
// requirement-level vertices to a loss is a trace.
// Throws ConfigError when S has no loss vertex.
TraceSet find_impact_traces(const graph::LabeledGraph& s, const PathSet& vulnerable);

struct AttackRef {
    std::string id;
    std::string source;  // CVE | CWE | CAPEC
    std::string title;
    std::string related_via;
};

struct ComponentSummary {
    std::string component;
    std::string label;
    std::vector<AttackRef> relevant;
    std::vector<evidence::Combination> combinations;
    std::size_t candidate_count = 0;
};

struct LossGroup {
    std::string loss;
    std::string description;
    std::optional<int> priority;
    std::vector<std::size_t> traces;  // indices into the report's trace list
};

struct MissionImpactReport {
    long max_len = 0;
    std::size_t k = 0;
    PathSet paths;
    std::vector<VulnerablePath> chains;
    TraceSet traces;
    std::vector<LossGroup> losses;  // by priority, unprioritized last
    std::vector<ComponentSummary> components;
    std::map<std::string, graph::Vertex> elements;  // every vertex a trace or chain visits
};

struct ImpactInputs {
    const graph::LabeledGraph* s = nullptr;
    const graph::LabeledGraph* sigma = nullptr;
    const graph::LabeledGraph* av = nullptr;
    const evidence::CandidateIndex* candidates = nullptr;
    const std::map<std::string, evidence::RelevantEvidence>* relevant = nullptr;
};

MissionImpactReport mission_impact(const ImpactInputs& in, long max_len, std::size_t k);

inline constexpr std::string_view kReportSchema = "missionscope.report/1";

// Both renderings are deterministic: no timestamps, sorted collections.
std::string report_json(const MissionImpactReport& report);
std::string report_text(const MissionImpactReport& report);

} // namespace missionscope::impact
