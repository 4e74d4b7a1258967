#pragma once

#include "missionscope/evidence.hpp"
#include "missionscope/workspace.hpp"

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

namespace missionscope::service {

// Closed set of error codes returned in {"error": {code, message, detail}}.
namespace api_error {
inline constexpr std::string_view kBadRequest = "bad-request";            // 400
inline constexpr std::string_view kNotFound = "not-found";                // 404
inline constexpr std::string_view kUnknownComponent = "unknown-component";  // 404
inline constexpr std::string_view kUnknownCandidate = "unknown-candidate";  // 404
inline constexpr std::string_view kInvalidDecision = "invalid-decision";    // 422
inline constexpr std::string_view kPreconditionFailed = "precondition-failed";  // 409
inline constexpr std::string_view kInternal = "internal";                 // 500
}  // namespace api_error

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

// Thin HTTP facade over one workspace. Reads share a lock; triage writes are
// serialized and reach ledger.jsonl (fsynced) before they are acknowledged.
class MissionService {
public:
    // Loads S, Sigma, AV, config and the ledger; throws PreconditionError for
    // a missing artifact.
    MissionService(Workspace ws, long max_len, std::size_t k);
    ~MissionService();

    MissionService(const MissionService&) = delete;
    MissionService& operator=(const MissionService&) = delete;

    // Transport-independent dispatch, used by the HTTP handlers and tests.
    ApiResponse handle(const ApiRequest& request);

    // Binds (port 0 picks a free port) and returns the bound port; throws
    // IoError when the address cannot be bound.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    ApiResponse get_graph(const std::string& kind, const std::map<std::string, std::string>& query);
    ApiResponse get_components();
    ApiResponse get_evidence(const std::string& component);
    ApiResponse post_triage(const std::string& body);
    ApiResponse get_impact();
    ApiResponse get_report();
    ApiResponse get_static(const std::string& path);

    Workspace ws_;
    long max_len_;
    std::size_t k_;
    MissionState state_;
    evidence::TriageLedger ledger_;
    std::shared_mutex mutex_;

    struct Http;
    std::unique_ptr<Http> http_;
};

ApiResponse api_error_response(int status, std::string_view code, const std::string& message,
                               const std::string& detail = {});

// JSON view of a graph used by GET /api/graphs/{kind}.
std::string graph_json(const graph::LabeledGraph& g);

} // namespace missionscope::service
