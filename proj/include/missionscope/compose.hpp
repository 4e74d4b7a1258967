#pragma once

#include "missionscope/graph.hpp"

#include <span>
#include <string>
#include <vector>

namespace missionscope::graph {

// One trace between elements of R, F and Sigma, stored top-to-bottom.
struct TraceLink {
    std::string src;
    std::string tgt;
    std::string relation;

    auto operator<=>(const TraceLink&) const = default;
};

// Builds the mission specification S from the three primitive graphs.
//
// S holds exactly the trace endpoints (copied with kind, label and
// attributes) and one arrow per trace. A trace whose endpoints share a source
// graph and that matches existing arrows there by (src, tgt, relation) brings
// those arrows in verbatim; any other trace gets the id
// "<src> -[<relation>]-> <tgt>". Structural elements carry their Sigma
// descriptor sets along.
//
// Throws CompositionError for unknown, ambiguous or duplicate traces and
// arrow-id clashes, DirectionError for a trace that points up the hierarchy.
LabeledGraph compose_mission_spec(const LabeledGraph& r, const LabeledGraph& f, const LabeledGraph& sigma,
                                  std::span<const TraceLink> traces);

std::string trace_arrow_id(const TraceLink& trace);

} // namespace missionscope::graph
