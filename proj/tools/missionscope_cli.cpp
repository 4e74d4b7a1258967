// missionscope: command-line driver over a mission workspace.
//
// Exit codes: 0 clean, 1 validation or analysis failure, 2 usage / I/O /
// missing artifact, 3 mission at risk (analyze found vulnerable paths).

#include "missionscope/error.hpp"
#include "missionscope/evidence.hpp"
#include "missionscope/graphml.hpp"
#include "missionscope/impact.hpp"
#include "missionscope/io.hpp"
#include "missionscope/service.hpp"
#include "missionscope/workspace.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iomanip>
#include <iostream>

namespace ms = missionscope;
namespace svc = missionscope::service;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAtRisk = 3;

int exit_code_for(const ms::Error& e) {
    const std::string& code = e.code();
    if (code == "io" || code == "precondition" || code == "lookup" || code == "triage" || code == "domain") {
        return kExitUsage;
    }
    return kExitInvalid;
}

svc::MissionService* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

struct Options {
    std::string workspace = ".";
    std::string config;
    long max_len = 8;
    std::size_t k = 2;
};

svc::Workspace open_workspace(const Options& opt) {
    std::optional<std::filesystem::path> config;
    if (!opt.config.empty()) config = opt.config;
    return svc::Workspace(opt.workspace, config);
}

int run_ingest(const Options& opt, const std::string& cve, const std::string& cwe, const std::string& capec) {
    auto ws = open_workspace(opt);
    auto as_path = [](const std::string& p) -> std::optional<std::filesystem::path> {
        if (p.empty()) return std::nullopt;
        return p;
    };
    const auto summary = svc::cmd_ingest(ws, as_path(cve), as_path(cwe), as_path(capec));
    std::cout << "ingested CVE " << summary.counts.at("CVE") << ", CWE " << summary.counts.at("CWE")
              << ", CAPEC " << summary.counts.at("CAPEC") << "\n";
    for (const auto& r : summary.rejects) {
        std::cerr << "rejected " << ms::vuln::to_string(r.source) << " " << r.location
                  << (r.id.empty() ? "" : " (" + r.id + ")") << ": " << r.reason << "\n";
    }
    for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
    return kExitClean;
}

int run_validate(const Options& opt) {
    const auto violations = svc::cmd_validate(open_workspace(opt));
    for (const auto& v : violations) {
        std::cout << v.graph << ": [" << v.violation.invariant << "] " << v.violation.element << ": "
                  << v.violation.message << "\n";
    }
    if (violations.empty()) {
        std::cout << "workspace valid\n";
        return kExitClean;
    }
    std::cout << violations.size() << " violation(s)\n";
    return kExitInvalid;
}

int run_compose(const Options& opt) {
    auto ws = open_workspace(opt);
    const auto s = svc::cmd_compose(ws);
    std::cout << "S: " << s.vertices.size() << " vertices, " << s.arrows.size() << " arrows, "
              << s.descriptors.size() << " descriptor sets -> " << ws.graph_path(ms::graph::GraphKind::Mission).string()
              << "\n";
    return kExitClean;
}

int run_match(const Options& opt, const std::string& only) {
    auto ws = open_workspace(opt);
    const auto state = svc::MissionState::load(ws);
    const auto ledger = ws.open_ledger();
    if (!only.empty() && !state.candidates.count(only)) {
        throw ms::LookupError("'" + only + "' carries no descriptors in S");
    }
    for (const auto& [component, cands] : state.candidates) {
        if (!only.empty() && component != only) continue;
        std::cout << component << " [" << cands.ns << "] " << cands.candidates.size() << " candidates\n";
        for (const auto& c : cands.candidates) {
            std::cout << "  " << std::left << std::setw(16) << c.attack_id << std::fixed << std::setprecision(4)
                      << c.score << "  " << std::setw(10) << ms::evidence::to_string(ledger.status(component, c.attack_id));
            if (!c.related_via.empty()) std::cout << "  via " << c.related_via;
            std::cout << "\n";
        }
    }
    return kExitClean;
}

int run_triage(const Options& opt, const std::string& component, const std::string& attack,
               const std::string& decision, const std::string& analyst, const std::string& rationale) {
    auto ws = open_workspace(opt);
    const auto state = svc::MissionState::load(ws);
    auto ledger = ws.open_ledger();
    const auto entry =
        ms::evidence::record_triage(ledger, state.candidates, component, attack, decision, analyst, rationale);
    std::cout << entry.component << " " << entry.attack_id << " -> " << ms::evidence::to_string(entry.decision)
              << "\n";
    return kExitClean;
}

int run_analyze(const Options& opt) {
    if (opt.max_len < 0) throw ms::DomainError("--max-len must be non-negative");
    auto ws = open_workspace(opt);
    const auto analysis = svc::cmd_analyze(ws, opt.max_len, opt.k);
    const auto& r = analysis.report;
    for (const auto& [component, e] : analysis.relevant) {
        for (const auto& w : e.warnings) {
            if (!e.base.empty() || w.find("ignored") != std::string::npos) std::cerr << "warning: " << w << "\n";
        }
    }
    std::cout << "chains " << r.chains.size() << ", vulnerable paths " << r.paths.paths.size() << ", impact traces "
              << r.traces.traces.size() << "\n";
    std::cout << ws.report_json_path().string() << "\n" << ws.report_text_path().string() << "\n";
    return r.paths.empty() ? kExitClean : kExitAtRisk;
}

int run_serve(const Options& opt, const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos) throw ms::DomainError("--bind expects host:port");
    const std::string host = address.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        throw ms::DomainError("--bind expects host:port");
    }
    svc::MissionService service(open_workspace(opt), opt.max_len, opt.k);
    const int bound = service.bind(host, port);
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << opt.workspace << " on http://" << host << ":" << bound << "/" << std::endl;
    service.listen();
    g_service = nullptr;
    return kExitClean;
}

int run_export(const Options& opt, const std::string& kind_name, const std::string& format, const std::string& out) {
    auto kind = ms::graph::parse_graph_kind(kind_name);
    if (!kind) throw ms::DomainError("unknown graph kind '" + kind_name + "' (R, F, Sigma, S, AV)");
    const auto g = open_workspace(opt).load_graph(*kind);
    const std::string text = format == "json" ? svc::graph_json(g) : ms::graph::write_graphml(g);
    if (out.empty()) {
        std::cout << text;
    } else {
        ms::io::write_file(out, text);
    }
    return kExitClean;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"missionscope: mission-aware vulnerability impact analysis"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--workspace,-w", opt.workspace, "Workspace directory")->capture_default_str();
    app.add_option("--config", opt.config, "Match config file (default <workspace>/config.json)");
    app.add_option("--max-len", opt.max_len, "Longest attack chain to enumerate")->capture_default_str();
    app.add_option("--k", opt.k, "Largest combination of CVEs")->capture_default_str()->check(CLI::PositiveNumber);

    std::string cve, cwe, capec;
    auto* ingest = app.add_subcommand("ingest", "Parse the CVE/CWE/CAPEC snapshot into the AV graph");
    ingest->add_option("--cve", cve, "CVE JSONL feed");
    ingest->add_option("--cwe", cwe, "CWE JSON array");
    ingest->add_option("--capec", capec, "CAPEC JSON array");

    auto* validate = app.add_subcommand("validate", "Check every workspace graph");
    auto* compose = app.add_subcommand("compose", "Build R and F from the STPA tables and compose S");

    std::string only;
    auto* match = app.add_subcommand("match", "List candidate attack vectors per component");
    match->add_option("--component", only, "Restrict to one component");

    std::string component, attack, decision, analyst, rationale;
    auto* triage = app.add_subcommand("triage", "Record analyst decisions");
    triage->require_subcommand(1);
    auto* triage_add = triage->add_subcommand("add", "Append one decision to the ledger");
    triage_add->add_option("--component", component)->required();
    triage_add->add_option("--attack", attack, "Attack id")->required();
    triage_add->add_option("--decision", decision, "relevant | irrelevant")->required();
    triage_add->add_option("--analyst", analyst)->required();
    triage_add->add_option("--rationale", rationale)->required();

    auto* analyze = app.add_subcommand("analyze", "Compute chains and impact traces, write the report");

    std::string address = "127.0.0.1:8080";
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("--bind", address, "host:port")->capture_default_str();

    std::string kind = "S", format = "graphml", out;
    auto* export_cmd = app.add_subcommand("export", "Write one graph as GraphML or JSON");
    export_cmd->add_option("--kind", kind, "R | F | Sigma | S | AV")->capture_default_str();
    export_cmd->add_option("--format", format)->check(CLI::IsMember({"graphml", "json"}))->capture_default_str();
    export_cmd->add_option("--out,-o", out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitClean : kExitUsage;
    }

    try {
        if (*ingest) return run_ingest(opt, cve, cwe, capec);
        if (*validate) return run_validate(opt);
        if (*compose) return run_compose(opt);
        if (*match) return run_match(opt, only);
        if (*triage_add) return run_triage(opt, component, attack, decision, analyst, rationale);
        if (*analyze) return run_analyze(opt);
        if (*serve) return run_serve(opt, address);
        if (*export_cmd) return run_export(opt, kind, format, out);
    } catch (const ms::Error& e) {
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitUsage;
}
