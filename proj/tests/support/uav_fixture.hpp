#pragma once

#include "missionscope/compose.hpp"
#include "missionscope/evidence.hpp"
#include "missionscope/graph.hpp"
#include "missionscope/graphml.hpp"
#include "missionscope/io.hpp"
#include "missionscope/stpa.hpp"
#include "missionscope/vuln.hpp"
#include "missionscope/workspace.hpp"

#include <unistd.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mstest {

namespace ms = missionscope;
namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(MSCOPE_FIXTURE_DIR) / "uav"; }

// The bundled UAV workspace, built in memory from its source files.
struct UavFixture {
    ms::stpa::StpaDataset stpa;
    ms::graph::LabeledGraph r, f, sigma, s, av;
    std::vector<ms::graph::TraceLink> traces;
    ms::vuln::IngestResult ingest;
    std::vector<std::string> av_warnings;
    ms::evidence::MatchConfig config;
    ms::evidence::CandidateIndex candidates;
    ms::evidence::TriageLedger ledger;
    std::map<std::string, ms::evidence::RelevantEvidence> relevant;
};

inline UavFixture load_uav(std::size_t k = 2) {
    const fs::path dir = fixture_dir();
    UavFixture u;
    u.stpa = ms::stpa::parse_stpa_tables(ms::io::read_file(dir / "stpa.json"));
    u.r = ms::stpa::project_to_requirements(u.stpa);
    u.f = ms::stpa::project_to_function(u.stpa).graph;
    u.sigma = ms::graph::read_graphml_file(dir / "graphs" / "structure.graphml", ms::graph::GraphKind::Structure);
    u.traces = ms::service::parse_traces(ms::io::read_file(dir / "traces.json"));
    u.s = ms::graph::compose_mission_spec(u.r, u.f, u.sigma, u.traces);
    u.ingest = ms::vuln::ingest_snapshot(ms::io::read_file(dir / "snapshot" / "cve.jsonl"),
                                         ms::io::read_file(dir / "snapshot" / "cwe.json"),
                                         ms::io::read_file(dir / "snapshot" / "capec.json"));
    auto space = ms::vuln::build_av_graph(u.ingest.entries);
    u.av = std::move(space.graph);
    u.av_warnings = std::move(space.warnings);
    u.config = ms::evidence::parse_match_config(ms::io::read_file(dir / "config.json"));
    u.candidates = ms::evidence::match_components(u.s, u.av, u.config);
    u.ledger = ms::evidence::TriageLedger::parse(ms::io::read_file(dir / "ledger.jsonl"));
    u.relevant = ms::evidence::relevant_evidence(u.s, u.candidates, u.ledger, k);
    return u;
}

// Scratch copy of the fixture workspace, removed on destruction.
class TempWorkspace {
public:
    explicit TempWorkspace(const std::string& tag) {
        root_ = fs::temp_directory_path() /
                ("missionscope-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::remove_all(root_);
        fs::copy(fixture_dir(), root_, fs::copy_options::recursive);
    }
    ~TempWorkspace() {
        std::error_code ec;
        fs::remove_all(root_, ec);
    }
    TempWorkspace(const TempWorkspace&) = delete;
    TempWorkspace& operator=(const TempWorkspace&) = delete;

    const fs::path& root() const { return root_; }

private:
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path root_;
};

} // namespace mstest
