#include "missionscope/service.hpp"

#include "missionscope/error.hpp"
#include "missionscope/graphml.hpp"
#include "missionscope/io.hpp"
#include "missionscope/vuln.hpp"

#include "httplib.h"
#include "json.hpp"

#include <mutex>
#include <regex>

namespace missionscope::service {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kPlaceholder =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>missionscope</title></head>\n"
    "<body><h1>missionscope</h1><p>No UI bundle in this workspace. The API lives under "
    "<code>/api/</code>: graphs/{kind}, components, evidence/{component}, triage, impact, report.</p>"
    "</body></html>\n";

ApiResponse json_response(int status, const ordered_json& doc) {
    return {status, "application/json", doc.dump(2) + "\n"};
}

std::string_view content_type_for(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

ordered_json attributes_json(const graph::AttributeMap& attrs) {
    ordered_json out = ordered_json::object();
    for (const auto& [key, value] : attrs) out[key] = value;
    return out;
}

ordered_json descriptor_json(const graph::DescriptorSet& set) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : set.entries) {
        entries.push_back({{"category", graph::to_string(e.category)}, {"key", e.key}, {"value", e.value}});
    }
    return {{"owner", {{"type", set.owner.type == graph::ElementType::Vertex ? "vertex" : "arrow"},
                       {"id", set.owner.id}}},
            {"ns", set.ns},
            {"entries", entries}};
}

} // namespace

ApiResponse api_error_response(int status, std::string_view code, const std::string& message,
                               const std::string& detail) {
    return json_response(status, {{"error", {{"code", code}, {"message", message}, {"detail", detail}}}});
}

std::string graph_json(const graph::LabeledGraph& g) {
    ordered_json doc;
    doc["kind"] = graph::to_string(g.kind);
    doc["attributes"] = attributes_json(g.attributes);
    ordered_json vertices = ordered_json::array();
    for (const auto& v : g.vertices) {
        vertices.push_back({{"id", v.id}, {"kind", graph::to_string(v.kind)}, {"label", v.label},
                            {"attributes", attributes_json(v.attributes)}});
    }
    doc["vertices"] = vertices;
    ordered_json arrows = ordered_json::array();
    for (const auto& a : g.arrows) {
        arrows.push_back({{"id", a.id}, {"src", a.src}, {"tgt", a.tgt}, {"relation", a.relation},
                          {"attributes", attributes_json(a.attributes)}});
    }
    doc["arrows"] = arrows;
    ordered_json descriptors = ordered_json::array();
    for (const auto& d : g.descriptors) descriptors.push_back(descriptor_json(d));
    doc["descriptors"] = descriptors;
    return doc.dump(2) + "\n";
}

struct MissionService::Http {
    httplib::Server server;
};

MissionService::MissionService(Workspace ws, long max_len, std::size_t k)
    : ws_(std::move(ws)), max_len_(max_len), k_(k), state_(MissionState::load(ws_)), ledger_(ws_.open_ledger()) {}

MissionService::~MissionService() { stop(); }

ApiResponse MissionService::handle(const ApiRequest& request) {
    static const std::regex kGraph(R"(/api/graphs/([^/]+))");
    static const std::regex kEvidence(R"(/api/evidence/(.+))");
    try {
        std::smatch m;
        const std::string& path = request.path;
        if (request.method == "GET") {
            if (std::regex_match(path, m, kGraph)) return get_graph(m[1], request.query);
            if (path == "/api/components") return get_components();
            if (std::regex_match(path, m, kEvidence)) return get_evidence(httplib::detail::decode_url(m[1], false));
            if (path == "/api/impact") return get_impact();
            if (path == "/api/report") return get_report();
            if (path.rfind("/api/", 0) != 0) return get_static(path);
        } else if (request.method == "POST" && path == "/api/triage") {
            return post_triage(request.body);
        }
        return api_error_response(404, api_error::kNotFound, "no route for " + request.method + " " + path);
    } catch (const PreconditionError& e) {
        return api_error_response(409, api_error::kPreconditionFailed, e.what());
    } catch (const std::exception& e) {
        return api_error_response(500, api_error::kInternal, e.what());
    }
}

ApiResponse MissionService::get_graph(const std::string& kind_name, const std::map<std::string, std::string>& query) {
    auto kind = graph::parse_graph_kind(kind_name);
    if (!kind) {
        return api_error_response(404, api_error::kNotFound, "unknown graph kind '" + kind_name + "'",
                                  "expected one of R, F, Sigma, S, AV");
    }
    graph::LabeledGraph g;
    {
        std::shared_lock lock(mutex_);
        switch (*kind) {
        case graph::GraphKind::Mission: g = state_.s; break;
        case graph::GraphKind::Structure: g = state_.sigma; break;
        case graph::GraphKind::AttackVectors: g = state_.av; break;
        default: g = ws_.load_graph(*kind); break;
        }
    }
    auto format = query.find("format");
    if (format != query.end() && format->second == "graphml") {
        return {200, "application/graphml+xml", graph::write_graphml(g)};
    }
    return {200, "application/json", graph_json(g)};
}

ApiResponse MissionService::get_components() {
    std::shared_lock lock(mutex_);
    const auto relevant = evidence::relevant_evidence(state_.s, state_.candidates, ledger_, k_);
    ordered_json list = ordered_json::array();
    auto add = [&](const std::string& id, std::string_view type, const std::string& label) {
        ordered_json item = {{"id", id}, {"type", type}, {"label", label}};
        auto c = state_.candidates.find(id);
        item["ns"] = c == state_.candidates.end() ? ordered_json(nullptr) : ordered_json(c->second.ns);
        item["candidates"] = c == state_.candidates.end() ? 0 : c->second.candidates.size();
        auto r = relevant.find(id);
        item["relevant"] = r == relevant.end() ? 0 : r->second.base.size();
        list.push_back(item);
    };
    for (const auto& v : state_.s.vertices) {
        if (v.kind == graph::VertexKind::Component) add(v.id, "vertex", v.label);
    }
    for (const auto& a : state_.s.arrows) {
        if (state_.candidates.count(a.id)) add(a.id, "arrow", a.src + " -> " + a.tgt);
    }
    return json_response(200, {{"components", list}});
}

ApiResponse MissionService::get_evidence(const std::string& component) {
    std::shared_lock lock(mutex_);
    auto owner = state_.s.resolve_owner(component);
    if (!owner) {
        return api_error_response(404, api_error::kUnknownComponent, "'" + component + "' is not an element of S");
    }
    const auto rel = evidence::rel_evidence(component, state_.s, state_.candidates, ledger_, k_);
    ordered_json doc;
    doc["component"] = component;
    if (const auto* v = state_.s.find_vertex(component)) {
        doc["label"] = v->label;
    } else {
        const auto* a = state_.s.find_arrow(component);
        doc["label"] = a->src + " -> " + a->tgt;
    }
    const auto* set = state_.s.descriptors_of(*owner);
    doc["descriptors"] = set ? descriptor_json(*set) : ordered_json(nullptr);

    std::map<std::string, const evidence::TriageEntry*> latest;
    for (const auto& e : ledger_.entries()) {
        if (e.component == component) latest[e.attack_id] = &e;
    }
    ordered_json candidates = ordered_json::array();
    if (auto it = state_.candidates.find(component); it != state_.candidates.end()) {
        for (const auto& c : it->second.candidates) {
            ordered_json item = {{"attack_id", c.attack_id}};
            if (const auto* v = state_.av.find_vertex(c.attack_id)) {
                const auto entry = vuln::entry_from_vertex(*v);
                item["source"] = vuln::to_string(entry.source);
                item["title"] = entry.title;
            }
            item["score"] = c.score;
            item["related_via"] = c.related_via.empty() ? ordered_json(nullptr) : ordered_json(c.related_via);
            item["status"] = evidence::to_string(ledger_.status(component, c.attack_id));
            if (auto l = latest.find(c.attack_id); l != latest.end()) {
                item["analyst"] = l->second->analyst;
                item["rationale"] = l->second->rationale;
                item["decided_at"] = l->second->timestamp;
            }
            candidates.push_back(item);
        }
    }
    doc["candidates"] = candidates;
    doc["relevant"] = rel.base;
    doc["combinations"] = rel.combinations;
    doc["warnings"] = rel.warnings;
    return json_response(200, doc);
}

ApiResponse MissionService::post_triage(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return api_error_response(400, api_error::kBadRequest, "request body must be a JSON object");
    }
    std::map<std::string, std::string> fields;
    for (const char* name : {"component", "attack_id", "decision", "analyst", "rationale"}) {
        auto it = doc.find(name);
        if (it == doc.end() || !it->is_string()) {
            return api_error_response(400, api_error::kBadRequest, std::string("missing string field '") + name + "'");
        }
        fields[name] = it->get<std::string>();
    }

    std::unique_lock lock(mutex_);
    if (!state_.s.resolve_owner(fields["component"])) {
        return api_error_response(404, api_error::kUnknownComponent,
                                  "'" + fields["component"] + "' is not an element of S");
    }
    try {
        const auto entry = evidence::record_triage(ledger_, state_.candidates, fields["component"],
                                                   fields["attack_id"], fields["decision"], fields["analyst"],
                                                   fields["rationale"]);
        return json_response(201, {{"entry", json::parse(evidence::TriageLedger::serialize(entry))},
                                   {"status", evidence::to_string(ledger_.status(entry.component, entry.attack_id))}});
    } catch (const DomainError& e) {
        return api_error_response(422, api_error::kInvalidDecision, e.what());
    } catch (const TriageError& e) {
        return api_error_response(404, api_error::kUnknownCandidate, e.what());
    }
}

ApiResponse MissionService::get_impact() {
    std::shared_lock lock(mutex_);
    const auto analysis = state_.analyze(ledger_, max_len_, k_);
    return {200, "application/json", impact::report_json(analysis.report)};
}

ApiResponse MissionService::get_report() {
    std::shared_lock lock(mutex_);
    const auto analysis = state_.analyze(ledger_, max_len_, k_);
    return {200, "text/plain; charset=utf-8", impact::report_text(analysis.report)};
}

ApiResponse MissionService::get_static(const std::string& path) {
    std::string rel = path == "/" ? "index.html" : path.substr(1);
    if (rel.find("..") != std::string::npos) {
        return api_error_response(400, api_error::kBadRequest, "path escapes the UI directory");
    }
    const auto file = ws_.static_dir() / rel;
    if (std::filesystem::is_regular_file(file)) {
        return {200, std::string(content_type_for(file)), io::read_file(file)};
    }
    if (path == "/" || path == "/index.html") return {200, "text/html; charset=utf-8", std::string(kPlaceholder)};
    return api_error_response(404, api_error::kNotFound, "no file '" + rel + "'");
}

int MissionService::bind(const std::string& host, int port) {
    http_ = std::make_unique<Http>();
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request{req.method, req.path, {}, req.body};
        for (const auto& [key, value] : req.params) request.query[key] = value;
        const ApiResponse response = handle(request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    };
    http_->server.Get(".*", forward);
    http_->server.Post(".*", forward);
    int bound = -1;
    if (port == 0) {
        bound = http_->server.bind_to_any_port(host);
    } else if (http_->server.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void MissionService::listen() {
    if (!http_) throw PreconditionError("bind() must be called before listen()");
    http_->server.listen_after_bind();
}

void MissionService::stop() {
    if (http_) http_->server.stop();
}

} // namespace missionscope::service
