#pragma once

#include "missionscope/compose.hpp"
#include "missionscope/evidence.hpp"
#include "missionscope/graph.hpp"
#include "missionscope/impact.hpp"
#include "missionscope/vuln.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace missionscope::service {

namespace fs = std::filesystem;

// One mission on disk. Everything the tools compute is derived from these
// files; nothing else is kept between runs.
//
//   stpa.json                    loss/hazard/control-action tables (optional)
//   traces.json                  trace links for S
//   snapshot/cve.jsonl, cwe.json, capec.json
//   graphs/requirements.graphml  R   (generated from stpa.json when present)
//   graphs/function.graphml      F   (idem)
//   graphs/structure.graphml     Sigma
//   graphs/mission.graphml       S   (written by compose)
//   cache/av.graphml, cache/ingest.json
//   ledger.jsonl, config.json
//   reports/report.json, reports/report.txt
//   ui/                          static files served at /
class Workspace {
public:
    explicit Workspace(fs::path root, std::optional<fs::path> config = std::nullopt);

    const fs::path& root() const noexcept { return root_; }
    fs::path graph_path(graph::GraphKind kind) const;
    fs::path stpa_path() const { return root_ / "stpa.json"; }
    fs::path traces_path() const { return root_ / "traces.json"; }
    fs::path snapshot_dir() const { return root_ / "snapshot"; }
    fs::path ingest_summary_path() const { return root_ / "cache" / "ingest.json"; }
    fs::path ledger_path() const { return root_ / "ledger.jsonl"; }
    fs::path config_path() const { return config_ ? *config_ : root_ / "config.json"; }
    fs::path report_json_path() const { return root_ / "reports" / "report.json"; }
    fs::path report_text_path() const { return root_ / "reports" / "report.txt"; }
    fs::path static_dir() const { return root_ / "ui"; }

    // Throw PreconditionError naming the missing artifact.
    graph::LabeledGraph load_graph(graph::GraphKind kind) const;
    std::vector<graph::TraceLink> load_traces() const;
    // Defaults when config.json is absent.
    evidence::MatchConfig load_config() const;
    // Bound to ledger.jsonl; a missing file is an empty ledger.
    evidence::TriageLedger open_ledger() const;

private:
    fs::path root_;
    std::optional<fs::path> config_;
};

std::vector<graph::TraceLink> parse_traces(std::string_view document);
std::string write_traces(const std::vector<graph::TraceLink>& traces);

struct IngestSummary {
    std::map<std::string, std::size_t> counts;  // CVE / CWE / CAPEC
    std::vector<vuln::Reject> rejects;
    std::vector<std::string> warnings;
    std::string to_json() const;
};

// Reads the three snapshot documents (defaults: <root>/snapshot/...), writes
// the AV cache and the summary. Throws IoError for an unreadable path.
IngestSummary cmd_ingest(const Workspace& ws, std::optional<fs::path> cve = {}, std::optional<fs::path> cwe = {},
                         std::optional<fs::path> capec = {});

// Regenerates R and F from stpa.json when present, then composes S.
graph::LabeledGraph cmd_compose(const Workspace& ws);

struct GraphViolation {
    std::string graph;  // R, F, Sigma, S, AV, stpa, traces
    graph::Violation violation;
};

// Every present artifact is checked; a missing one is reported, not thrown.
std::vector<GraphViolation> cmd_validate(const Workspace& ws);

// Everything derived for one analysis run.
struct Analysis {
    graph::LabeledGraph s;
    graph::LabeledGraph sigma;
    graph::LabeledGraph av;
    evidence::MatchConfig config;
    evidence::CandidateIndex candidates;
    std::map<std::string, evidence::RelevantEvidence> relevant;
    impact::MissionImpactReport report;
};

// Loaded state the analysis runs over; kept separately so the HTTP service
// can hold it across requests.
struct MissionState {
    graph::LabeledGraph s;
    graph::LabeledGraph sigma;
    graph::LabeledGraph av;
    evidence::MatchConfig config;
    evidence::CandidateIndex candidates;

    static MissionState load(const Workspace& ws);
    Analysis analyze(const evidence::TriageLedger& ledger, long max_len, std::size_t k) const;
};

// Writes reports/report.{json,txt}; returns the analysis.
Analysis cmd_analyze(const Workspace& ws, long max_len, std::size_t k);

} // namespace missionscope::service
