#pragma once

#include "missionscope/graph.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace missionscope::vuln {

enum class Source { CVE, CWE, CAPEC };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view text);
// Source implied by a well-formed identifier (CVE-YYYY-NNNN+, CWE-N, CAPEC-N).
std::optional<Source> source_of_id(std::string_view id);
// 0 for CVE, 1 for CWE, 2 for CAPEC: arrows between databases point up.
int concreteness_rank(Source source);

struct AttackVectorEntry {
    std::string id;
    Source source = Source::CVE;
    std::string title;
    std::string description;
    std::vector<std::string> parents;     // same-database parents (child-of)
    std::vector<std::string> cross_refs;  // cwe_refs / capec_refs
    std::vector<std::string> related;     // other ids listed by the feed, kept as-is

    std::vector<std::string> references() const;
    bool operator==(const AttackVectorEntry&) const = default;
};

// A record that could not be ingested. `location` is "line N" for the CVE
// feed and "record N" for the array feeds.
struct Reject {
    Source source = Source::CVE;
    std::string location;
    std::string id;
    std::string reason;
};

struct IngestResult {
    std::vector<AttackVectorEntry> entries;
    std::vector<Reject> rejects;

    std::size_t count(Source source) const;
};

// Parses the three offline snapshots (formats in docs/formats.md). Malformed
// records are skipped and listed in `rejects`; empty documents are legal.
IngestResult ingest_snapshot(std::string_view cve_doc, std::string_view cwe_doc, std::string_view capec_doc);

inline constexpr std::string_view kWeaknessOf = "weakness-of";
inline constexpr std::string_view kPatternOf = "pattern-of";
inline constexpr std::string_view kChildOf = "child-of";
inline constexpr std::string_view kIntraRelationship = "intrarelationship";
inline constexpr std::string_view kInterRelationship = "interrelationship";

// Vertex/arrow attribute keys used in AV graphs.
inline constexpr std::string_view kAttrSource = "av.source";
inline constexpr std::string_view kAttrTitle = "av.title";
inline constexpr std::string_view kAttrDescription = "av.description";
inline constexpr std::string_view kAttrParents = "av.parents";
inline constexpr std::string_view kAttrCrossRefs = "av.cross_refs";
inline constexpr std::string_view kAttrRelated = "av.related";
inline constexpr std::string_view kAttrScope = "av.scope";

struct AttackVectorSpace {
    graph::LabeledGraph graph;           // kind AV
    std::vector<std::string> warnings;   // dangling or misdirected references
};

// CVE -> CWE (weakness-of), CWE -> CAPEC (pattern-of, union of both sides),
// CWE -> CWE and CAPEC -> CAPEC (child-of, child to parent).
AttackVectorSpace build_av_graph(std::span<const AttackVectorEntry> entries);

// Inverse of the vertex encoding used by build_av_graph.
AttackVectorEntry entry_from_vertex(const graph::Vertex& vertex);
std::vector<AttackVectorEntry> entries_from_graph(const graph::LabeledGraph& av);

// Vertices within `depth` arrows of `id` in either direction, plus every
// arrow between them. Throws LookupError for an unknown id.
graph::LabeledGraph neighborhood(const graph::LabeledGraph& av, std::string_view id, std::size_t depth);

// AV-specific invariants: scope tags agree with endpoint sources, no CVE-CVE
// arrows, cross-database arrows run concrete -> abstract.
std::vector<graph::Violation> check_av(const graph::LabeledGraph& av);

} // namespace missionscope::vuln
