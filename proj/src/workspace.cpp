#include "missionscope/workspace.hpp"

#include "missionscope/error.hpp"
#include "missionscope/graphml.hpp"
#include "missionscope/io.hpp"
#include "missionscope/stpa.hpp"

#include "json.hpp"

namespace missionscope::service {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void require(const fs::path& path, std::string_view what) {
    if (!fs::exists(path)) {
        throw PreconditionError(std::string(what) + " is missing (expected at '" + path.string() + "')");
    }
}

std::string_view artifact_name(graph::GraphKind kind) {
    switch (kind) {
    case graph::GraphKind::Requirements: return "requirements graph R";
    case graph::GraphKind::Function: return "function graph F";
    case graph::GraphKind::Structure: return "structure graph Sigma";
    case graph::GraphKind::Mission: return "mission specification S (run compose)";
    case graph::GraphKind::AttackVectors: return "attack-vector graph (run ingest)";
    }
    return "graph";
}

} // namespace

Workspace::Workspace(fs::path root, std::optional<fs::path> config)
    : root_(std::move(root)), config_(std::move(config)) {}

fs::path Workspace::graph_path(graph::GraphKind kind) const {
    switch (kind) {
    case graph::GraphKind::Requirements: return root_ / "graphs" / "requirements.graphml";
    case graph::GraphKind::Function: return root_ / "graphs" / "function.graphml";
    case graph::GraphKind::Structure: return root_ / "graphs" / "structure.graphml";
    case graph::GraphKind::Mission: return root_ / "graphs" / "mission.graphml";
    case graph::GraphKind::AttackVectors: return root_ / "cache" / "av.graphml";
    }
    return {};
}

graph::LabeledGraph Workspace::load_graph(graph::GraphKind kind) const {
    const fs::path path = graph_path(kind);
    require(path, artifact_name(kind));
    return graph::read_graphml_file(path, kind);
}

std::vector<graph::TraceLink> Workspace::load_traces() const {
    require(traces_path(), "trace list");
    return parse_traces(io::read_file(traces_path()));
}

evidence::MatchConfig Workspace::load_config() const {
    const fs::path path = config_path();
    if (!fs::exists(path)) {
        if (config_) throw PreconditionError("match config '" + path.string() + "' does not exist");
        return {};
    }
    return evidence::parse_match_config(io::read_file(path));
}

evidence::TriageLedger Workspace::open_ledger() const { return evidence::TriageLedger::open(ledger_path()); }

std::vector<graph::TraceLink> parse_traces(std::string_view document) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw FormatError("trace list must be a JSON array");
    std::vector<graph::TraceLink> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& t = doc[i];
        auto field = [&](const char* name) {
            if (!t.is_object() || !t.contains(name) || !t[name].is_string()) {
                throw FormatError("trace " + std::to_string(i) + ": missing string field '" + name + "'");
            }
            return t[name].get<std::string>();
        };
        out.push_back({field("src"), field("tgt"), field("relation")});
    }
    return out;
}

std::string write_traces(const std::vector<graph::TraceLink>& traces) {
    ordered_json doc = ordered_json::array();
    for (const auto& t : traces) doc.push_back({{"src", t.src}, {"tgt", t.tgt}, {"relation", t.relation}});
    return doc.dump(2) + "\n";
}

std::string IngestSummary::to_json() const {
    ordered_json doc;
    doc["counts"] = counts;
    ordered_json rejects_doc = ordered_json::array();
    for (const auto& r : rejects) {
        rejects_doc.push_back({{"source", vuln::to_string(r.source)}, {"location", r.location},
                               {"id", r.id}, {"reason", r.reason}});
    }
    doc["rejects"] = rejects_doc;
    doc["warnings"] = warnings;
    return doc.dump(2) + "\n";
}

IngestSummary cmd_ingest(const Workspace& ws, std::optional<fs::path> cve, std::optional<fs::path> cwe,
                         std::optional<fs::path> capec) {
    const fs::path cve_path = cve.value_or(ws.snapshot_dir() / "cve.jsonl");
    const fs::path cwe_path = cwe.value_or(ws.snapshot_dir() / "cwe.json");
    const fs::path capec_path = capec.value_or(ws.snapshot_dir() / "capec.json");
    const std::string cve_doc = io::read_file(cve_path);
    const std::string cwe_doc = io::read_file(cwe_path);
    const std::string capec_doc = io::read_file(capec_path);

    auto result = vuln::ingest_snapshot(cve_doc, cwe_doc, capec_doc);
    auto space = vuln::build_av_graph(result.entries);

    IngestSummary summary;
    for (auto source : {vuln::Source::CVE, vuln::Source::CWE, vuln::Source::CAPEC}) {
        summary.counts[std::string(vuln::to_string(source))] = result.count(source);
    }
    summary.rejects = std::move(result.rejects);
    summary.warnings = std::move(space.warnings);
    if (result.entries.empty()) summary.warnings.push_back("snapshot is empty: no attack vectors ingested");

    graph::write_graphml_file(ws.graph_path(graph::GraphKind::AttackVectors), space.graph);
    io::write_file(ws.ingest_summary_path(), summary.to_json());
    return summary;
}

graph::LabeledGraph cmd_compose(const Workspace& ws) {
    graph::LabeledGraph r;
    graph::LabeledGraph f;
    if (fs::exists(ws.stpa_path())) {
        const auto dataset = stpa::parse_stpa_tables(io::read_file(ws.stpa_path()));
        r = stpa::project_to_requirements(dataset);
        f = stpa::project_to_function(dataset).graph;
        graph::write_graphml_file(ws.graph_path(graph::GraphKind::Requirements), r);
        graph::write_graphml_file(ws.graph_path(graph::GraphKind::Function), f);
    } else {
        r = ws.load_graph(graph::GraphKind::Requirements);
        f = ws.load_graph(graph::GraphKind::Function);
    }
    const auto sigma = ws.load_graph(graph::GraphKind::Structure);
    const auto traces = ws.load_traces();
    auto s = graph::compose_mission_spec(r, f, sigma, traces);
    graph::write_graphml_file(ws.graph_path(graph::GraphKind::Mission), s);
    return s;
}

std::vector<GraphViolation> cmd_validate(const Workspace& ws) {
    std::vector<GraphViolation> out;
    std::map<graph::GraphKind, graph::LabeledGraph> loaded;
    auto note = [&](std::string graph, std::string element, std::string invariant, std::string message) {
        out.push_back({std::move(graph), {std::move(element), std::move(invariant), std::move(message)}});
    };
    for (auto kind : {graph::GraphKind::Requirements, graph::GraphKind::Function, graph::GraphKind::Structure,
                      graph::GraphKind::Mission, graph::GraphKind::AttackVectors}) {
        const std::string name(graph::to_string(kind));
        const fs::path path = ws.graph_path(kind);
        if (!fs::exists(path)) {
            note(name, path.string(), "missing-artifact", std::string(artifact_name(kind)) + " is missing");
            continue;
        }
        try {
            loaded.emplace(kind, graph::read_graphml_file(path, kind));
        } catch (const Error& e) {
            note(name, path.string(), e.code(), e.what());
        }
    }
    if (fs::exists(ws.stpa_path())) {
        try {
            stpa::parse_stpa_tables(io::read_file(ws.stpa_path()));
        } catch (const Error& e) {
            note("stpa", ws.stpa_path().string(), e.code(), e.what());
        }
    }
    if (auto it = loaded.find(graph::GraphKind::Mission); it != loaded.end()) {
        graph::SourceGraphs sources;
        auto source = [&](graph::GraphKind kind) {
            auto found = loaded.find(kind);
            return found == loaded.end() ? nullptr : &found->second;
        };
        sources.requirements = source(graph::GraphKind::Requirements);
        sources.function = source(graph::GraphKind::Function);
        sources.structure = source(graph::GraphKind::Structure);
        if (sources.requirements && sources.function && sources.structure) {
            for (auto& v : graph::validate(it->second, sources)) out.push_back({"S", std::move(v)});
        }
    }
    if (auto it = loaded.find(graph::GraphKind::AttackVectors); it != loaded.end()) {
        for (auto& v : vuln::check_av(it->second)) out.push_back({"AV", std::move(v)});
    }
    return out;
}

MissionState MissionState::load(const Workspace& ws) {
    MissionState state;
    state.s = ws.load_graph(graph::GraphKind::Mission);
    state.sigma = ws.load_graph(graph::GraphKind::Structure);
    state.av = ws.load_graph(graph::GraphKind::AttackVectors);
    state.config = ws.load_config();
    state.candidates = evidence::match_components(state.s, state.av, state.config);
    return state;
}

Analysis MissionState::analyze(const evidence::TriageLedger& ledger, long max_len, std::size_t k) const {
    Analysis a;
    a.s = s;
    a.sigma = sigma;
    a.av = av;
    a.config = config;
    a.candidates = candidates;
    a.relevant = evidence::relevant_evidence(a.s, a.candidates, ledger, k);
    impact::ImpactInputs in{&a.s, &a.sigma, &a.av, &a.candidates, &a.relevant};
    a.report = impact::mission_impact(in, max_len, k);
    return a;
}

Analysis cmd_analyze(const Workspace& ws, long max_len, std::size_t k) {
    const auto state = MissionState::load(ws);
    const auto ledger = ws.open_ledger();
    auto analysis = state.analyze(ledger, max_len, k);
    io::write_file(ws.report_json_path(), impact::report_json(analysis.report));
    io::write_file(ws.report_text_path(), impact::report_text(analysis.report));
    return analysis;
}

} // namespace missionscope::service
