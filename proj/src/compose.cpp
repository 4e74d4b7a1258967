#include "missionscope/compose.hpp"

#include "missionscope/error.hpp"

#include <array>
#include <map>
#include <set>

namespace missionscope::graph {

std::string trace_arrow_id(const TraceLink& trace) {
    return trace.src + " -[" + trace.relation + "]-> " + trace.tgt;
}

LabeledGraph compose_mission_spec(const LabeledGraph& r, const LabeledGraph& f, const LabeledGraph& sigma,
                                  std::span<const TraceLink> traces) {
    const std::array<const LabeledGraph*, 3> sources{&r, &f, &sigma};

    struct Located {
        const LabeledGraph* graph;
        const Vertex* vertex;
    };
    auto locate = [&](const std::string& id, const TraceLink& trace) {
        std::optional<Located> hit;
        for (const LabeledGraph* g : sources) {
            if (const Vertex* v = g->find_vertex(id)) {
                if (hit) {
                    throw CompositionError("trace endpoint '" + id + "' of " + trace_arrow_id(trace) +
                                           " is ambiguous: it occurs in both " +
                                           std::string(to_string(hit->graph->kind)) + " and " +
                                           std::string(to_string(g->kind)));
                }
                hit = Located{g, v};
            }
        }
        if (!hit) {
            throw CompositionError("trace endpoint '" + id + "' of " + trace_arrow_id(trace) +
                                   " is not a vertex of R, F or Sigma");
        }
        return *hit;
    };

    LabeledGraph s;
    s.kind = GraphKind::Mission;
    std::map<std::string, Vertex> vertices;
    std::map<std::string, Arrow> arrows;
    std::set<TraceLink> seen;

    auto add_arrow = [&](Arrow arrow) {
        if (arrows.count(arrow.id)) {
            throw CompositionError("arrow id '" + arrow.id + "' is produced twice");
        }
        arrows.emplace(arrow.id, std::move(arrow));
    };

    for (const TraceLink& trace : traces) {
        if (!seen.insert(trace).second) {
            throw CompositionError("duplicate trace " + trace_arrow_id(trace));
        }
        const Located src = locate(trace.src, trace);
        const Located tgt = locate(trace.tgt, trace);
        const auto src_level = hierarchy_level(src.vertex->kind);
        const auto tgt_level = hierarchy_level(tgt.vertex->kind);
        if (!src_level || !tgt_level) {
            throw CompositionError("trace " + trace_arrow_id(trace) + " touches an attack-vector vertex");
        }
        if (*src_level > *tgt_level) {
            throw DirectionError("trace " + trace_arrow_id(trace) + " runs from " +
                                 std::string(to_string(src.vertex->kind)) + " up to " +
                                 std::string(to_string(tgt.vertex->kind)) +
                                 "; traces are stored top-to-bottom");
        }
        vertices.emplace(src.vertex->id, *src.vertex);
        vertices.emplace(tgt.vertex->id, *tgt.vertex);

        bool imported = false;
        if (src.graph == tgt.graph) {
            for (const Arrow& a : src.graph->arrows) {
                if (a.src == trace.src && a.tgt == trace.tgt && a.relation == trace.relation) {
                    add_arrow(a);
                    imported = true;
                }
            }
        }
        if (!imported) {
            add_arrow(Arrow{trace_arrow_id(trace), trace.src, trace.tgt, trace.relation, {}});
        }
    }

    for (auto& [id, v] : vertices) s.vertices.push_back(std::move(v));
    for (auto& [id, a] : arrows) s.arrows.push_back(std::move(a));

    for (const DescriptorSet& set : sigma.descriptors) {
        bool included = false;
        if (set.owner.type == ElementType::Vertex) {
            included = s.find_vertex(set.owner.id) != nullptr;
        } else {
            const Arrow* mine = s.find_arrow(set.owner.id);
            const Arrow* theirs = sigma.find_arrow(set.owner.id);
            included = mine && theirs && *mine == *theirs;
        }
        if (included) s.descriptors.push_back(set);
    }
    return s;
}

} // namespace missionscope::graph
