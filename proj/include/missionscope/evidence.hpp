#pragma once

#include "missionscope/graph.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace missionscope::evidence {

// Descriptor-to-attack matching parameters (config.json, see docs/formats.md).
struct MatchConfig {
    double min_score = 0.0;
    std::size_t max_candidates = 50;
    std::map<graph::DescriptorCategory, double> token_weights;  // missing category -> 1
    // Pull in the CWE/CAPEC classes reachable from a matched CVE.
    bool expand_abstractions = true;

    double weight(graph::DescriptorCategory category) const;
};

// Throws ConfigError naming the offending field.
MatchConfig parse_match_config(std::string_view document);
void check_config(const MatchConfig& cfg);
std::string write_match_config(const MatchConfig& cfg);

// Lowercase, split on anything that is not [a-z0-9] (bytes >= 0x80 are kept
// as token characters), drop single characters and stop words. Result is
// sorted and unique.
std::vector<std::string> tokenize(std::string_view text);

// Pre-tokenized AV entries, built once per AV graph.
class AvIndex {
public:
    explicit AvIndex(const graph::LabeledGraph& av);

    const graph::LabeledGraph& graph() const noexcept { return *av_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens(std::size_t vertex) const { return tokens_[vertex]; }
    // Targets of interrelationship arrows leaving `vertex`.
    const std::vector<std::size_t>& abstractions(std::size_t vertex) const { return up_[vertex]; }

private:
    const graph::LabeledGraph* av_;
    std::vector<std::vector<std::string>> tokens_;
    std::vector<std::vector<std::size_t>> up_;
};

struct Candidate {
    std::string attack_id;
    double score = 0.0;
    // Set when the entry joined through the AV graph rather than by text:
    // the matched CVE it was reached from.
    std::string related_via;

    bool operator==(const Candidate&) const = default;
};

// Candidates for one descriptor set: descending score, then id.
std::vector<Candidate> evidence(const graph::DescriptorSet& descriptors, const AvIndex& av, const MatchConfig& cfg);
std::vector<Candidate> evidence(const graph::DescriptorSet& descriptors, const graph::LabeledGraph& av,
                                const MatchConfig& cfg);

struct ComponentCandidates {
    std::string component;  // vertex or arrow id in S
    std::string ns;
    std::vector<Candidate> candidates;
};

// Candidates for every descriptor-carrying element of S, keyed by component.
using CandidateIndex = std::map<std::string, ComponentCandidates>;

CandidateIndex match_components(const graph::LabeledGraph& s, const graph::LabeledGraph& av, const MatchConfig& cfg);

enum class Decision { Relevant, Irrelevant };
enum class Status { Candidate, Relevant, Irrelevant };

std::string_view to_string(Decision decision);
std::string_view to_string(Status status);
// Throws DomainError for anything but "relevant" / "irrelevant".
Decision parse_decision(std::string_view text);

struct TriageEntry {
    std::string timestamp;  // ISO-8601 UTC
    std::string analyst;
    std::string component;
    std::string attack_id;
    Decision decision = Decision::Relevant;
    std::string rationale;

    bool operator==(const TriageEntry&) const = default;
};

// Append-only decision log. When bound to a file, every append is written
// and fsynced before the in-memory copy changes.
class TriageLedger {
public:
    TriageLedger() = default;

    // Parses JSONL; throws FormatError with the line number.
    static TriageLedger parse(std::string_view document);
    // A missing file is an empty ledger; the file is created on first append.
    static TriageLedger open(const std::filesystem::path& path);

    static std::string serialize(const TriageEntry& entry);

    const std::vector<TriageEntry>& entries() const noexcept { return entries_; }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

    void append(TriageEntry entry);
    // Last decision for the pair wins.
    Status status(std::string_view component, std::string_view attack_id) const;

private:
    std::vector<TriageEntry> entries_;
    std::map<std::pair<std::string, std::string>, Decision> latest_;
    std::optional<std::filesystem::path> path_;
};

std::string utc_timestamp();

// The only mutation path for relevance. Throws DomainError for an unknown
// decision and TriageError when (component, attack_id) is not a candidate.
// An empty timestamp is replaced by the current time.
TriageEntry record_triage(TriageLedger& ledger, const CandidateIndex& candidates, std::string_view component,
                          std::string_view attack_id, std::string_view decision, std::string_view analyst,
                          std::string_view rationale, std::string timestamp = {});

using Combination = std::vector<std::string>;

// ∅, every base id alone, then CVE-only subsets of size 2..k; ordered by
// size, then lexicographically.
std::vector<Combination> enumerate_combinations(const std::set<std::string>& base, std::size_t k);

struct RelevantEvidence {
    std::string component;
    std::vector<std::string> base;          // sorted relevant attack ids
    std::vector<Combination> combinations;  // E, always starting with ∅
    std::vector<std::string> warnings;
};

RelevantEvidence rel_evidence(std::string_view component, const graph::LabeledGraph& s,
                              const CandidateIndex& candidates, const TriageLedger& ledger, std::size_t k);

// Component id -> sorted relevant base ids.
using RelevanceMap = std::map<std::string, std::vector<std::string>>;

// rel_evidence for every descriptor-carrying element of S.
std::map<std::string, RelevantEvidence> relevant_evidence(const graph::LabeledGraph& s,
                                                          const CandidateIndex& candidates,
                                                          const TriageLedger& ledger, std::size_t k);

// Drops components whose base is empty.
RelevanceMap relevance_map(const std::map<std::string, RelevantEvidence>& relevant);

} // namespace missionscope::evidence
