#include "missionscope/graph.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace missionscope::graph {

namespace {

constexpr std::array<std::pair<GraphKind, std::string_view>, 5> kGraphKindNames{{
    {GraphKind::Requirements, "R"},
    {GraphKind::Function, "F"},
    {GraphKind::Structure, "Sigma"},
    {GraphKind::Mission, "S"},
    {GraphKind::AttackVectors, "AV"},
}};

constexpr std::array<std::pair<VertexKind, std::string_view>, 8> kVertexKindNames{{
    {VertexKind::Requirement, "requirement"},
    {VertexKind::Loss, "loss"},
    {VertexKind::Hazard, "hazard"},
    {VertexKind::ControlAction, "control-action"},
    {VertexKind::SafetyConstraint, "safety-constraint"},
    {VertexKind::Behavior, "behavior"},
    {VertexKind::Component, "component"},
    {VertexKind::AttackVector, "attack-vector"},
}};

constexpr std::array<std::pair<DescriptorCategory, std::string_view>, 5> kCategoryNames{{
    {DescriptorCategory::InformationFlow, "information-flow"},
    {DescriptorCategory::Property, "property"},
    {DescriptorCategory::Functionality, "functionality"},
    {DescriptorCategory::NonFunctional, "non-functional"},
    {DescriptorCategory::InterfaceInteraction, "interface-interaction"},
}};

template <typename Table, typename Enum>
std::string_view name_of(const Table& table, Enum value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename Enum, typename Table>
std::optional<Enum> value_of(const Table& table, std::string_view text) {
    for (const auto& [v, name] : table) {
        if (name == text) return v;
    }
    return std::nullopt;
}

bool vertex_kind_allowed(GraphKind graph, VertexKind vertex) {
    switch (graph) {
    case GraphKind::Requirements:
        return vertex == VertexKind::Requirement || vertex == VertexKind::Loss ||
               vertex == VertexKind::Hazard;
    case GraphKind::Function:
        return vertex == VertexKind::Behavior || vertex == VertexKind::ControlAction ||
               vertex == VertexKind::SafetyConstraint;
    case GraphKind::Structure:
        return vertex == VertexKind::Component;
    case GraphKind::Mission:
        return vertex != VertexKind::AttackVector;
    case GraphKind::AttackVectors:
        return vertex == VertexKind::AttackVector;
    }
    return false;
}

bool carries_descriptors(GraphKind kind) {
    return kind == GraphKind::Structure || kind == GraphKind::Mission;
}

// XML 1.0 forbids C0 controls other than tab, LF and CR, even as character
// references, so such strings cannot survive a GraphML round trip.
bool xml_representable(std::string_view text) {
    return std::none_of(text.begin(), text.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return u < 0x20 && u != '\t' && u != '\n' && u != '\r';
    });
}

std::string owner_name(const OwnerRef& owner) {
    return (owner.type == ElementType::Vertex ? "vertex " : "arrow ") + owner.id;
}

void check_text(std::vector<Violation>& out, const std::string& element, std::string_view text) {
    if (!xml_representable(text)) {
        out.push_back({element, "xml-text", "text contains a control character not representable in XML"});
    }
}

void check_attributes(std::vector<Violation>& out, const std::string& element,
                      const AttributeMap& attributes) {
    for (const auto& [key, value] : attributes) {
        if (key.empty()) {
            out.push_back({element, "attribute-key", "attribute with empty key"});
        }
        if (std::string_view(key).starts_with(kReservedPrefix)) {
            out.push_back({element, "reserved-attribute",
                           "attribute key '" + key + "' uses the reserved 'ma.' prefix"});
        }
        check_text(out, element, key);
        check_text(out, element, value);
    }
}

} // namespace

std::string_view to_string(GraphKind kind) { return name_of(kGraphKindNames, kind); }
std::optional<GraphKind> parse_graph_kind(std::string_view text) {
    return value_of<GraphKind>(kGraphKindNames, text);
}

std::string_view to_string(VertexKind kind) { return name_of(kVertexKindNames, kind); }
std::optional<VertexKind> parse_vertex_kind(std::string_view text) {
    return value_of<VertexKind>(kVertexKindNames, text);
}

std::optional<int> hierarchy_level(VertexKind kind) {
    switch (kind) {
    case VertexKind::Requirement:
    case VertexKind::Loss:
    case VertexKind::Hazard:
        return 0;
    case VertexKind::ControlAction:
    case VertexKind::SafetyConstraint:
    case VertexKind::Behavior:
        return 1;
    case VertexKind::Component:
        return 2;
    case VertexKind::AttackVector:
        return std::nullopt;
    }
    return std::nullopt;
}

std::string_view to_string(DescriptorCategory category) { return name_of(kCategoryNames, category); }
std::optional<DescriptorCategory> parse_descriptor_category(std::string_view text) {
    return value_of<DescriptorCategory>(kCategoryNames, text);
}

const std::vector<DescriptorCategory>& all_descriptor_categories() {
    static const std::vector<DescriptorCategory> all = [] {
        std::vector<DescriptorCategory> v;
        for (const auto& [c, _] : kCategoryNames) v.push_back(c);
        return v;
    }();
    return all;
}

const Vertex* LabeledGraph::find_vertex(std::string_view id) const {
    auto it = std::find_if(vertices.begin(), vertices.end(), [&](const Vertex& v) { return v.id == id; });
    return it == vertices.end() ? nullptr : &*it;
}

const Arrow* LabeledGraph::find_arrow(std::string_view id) const {
    auto it = std::find_if(arrows.begin(), arrows.end(), [&](const Arrow& a) { return a.id == id; });
    return it == arrows.end() ? nullptr : &*it;
}

const DescriptorSet* LabeledGraph::descriptors_of(const OwnerRef& owner) const {
    auto it = std::find_if(descriptors.begin(), descriptors.end(),
                           [&](const DescriptorSet& d) { return d.owner == owner; });
    return it == descriptors.end() ? nullptr : &*it;
}

std::optional<OwnerRef> LabeledGraph::resolve_owner(std::string_view id) const {
    if (find_vertex(id)) return OwnerRef{ElementType::Vertex, std::string(id)};
    if (find_arrow(id)) return OwnerRef{ElementType::Arrow, std::string(id)};
    return std::nullopt;
}

LabeledGraph canonical(LabeledGraph g) {
    std::sort(g.vertices.begin(), g.vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    std::sort(g.arrows.begin(), g.arrows.end(),
              [](const Arrow& a, const Arrow& b) { return a.id < b.id; });
    for (auto& set : g.descriptors) {
        std::sort(set.entries.begin(), set.entries.end());
    }
    std::sort(g.descriptors.begin(), g.descriptors.end(),
              [](const DescriptorSet& a, const DescriptorSet& b) { return a.owner < b.owner; });
    return g;
}

bool structurally_equal(const LabeledGraph& a, const LabeledGraph& b) {
    if (a.kind != b.kind || a.attributes != b.attributes) return false;
    const LabeledGraph ca = canonical(a);
    const LabeledGraph cb = canonical(b);
    return ca.vertices == cb.vertices && ca.arrows == cb.arrows && ca.descriptors == cb.descriptors;
}

GraphIndex::GraphIndex(const LabeledGraph& g)
    : graph_(&g), out_(g.vertices.size()), in_(g.vertices.size()) {
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
        vertex_pos_.emplace(g.vertices[i].id, i);
    }
    for (std::size_t i = 0; i < g.arrows.size(); ++i) {
        const Arrow& a = g.arrows[i];
        arrow_pos_.emplace(a.id, i);
        auto s = vertex_pos_.find(a.src);
        auto t = vertex_pos_.find(a.tgt);
        if (s != vertex_pos_.end() && t != vertex_pos_.end()) {
            out_[s->second].push_back(i);
            in_[t->second].push_back(i);
        }
    }
}

std::optional<std::size_t> GraphIndex::vertex_pos(std::string_view id) const {
    auto it = vertex_pos_.find(std::string(id));
    if (it == vertex_pos_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> GraphIndex::arrow_pos(std::string_view id) const {
    auto it = arrow_pos_.find(std::string(id));
    if (it == arrow_pos_.end()) return std::nullopt;
    return it->second;
}

std::vector<Violation> validate(const LabeledGraph& g) {
    std::vector<Violation> out;
    check_attributes(out, "graph", g.attributes);

    std::set<std::string> vertex_ids;
    for (const Vertex& v : g.vertices) {
        const std::string element = "vertex " + v.id;
        if (v.id.empty()) {
            out.push_back({"vertex <empty>", "non-empty-id", "vertex id is empty"});
        } else if (!vertex_ids.insert(v.id).second) {
            out.push_back({element, "unique-vertex-id", "duplicate vertex id '" + v.id + "'"});
        }
        if (!vertex_kind_allowed(g.kind, v.kind)) {
            out.push_back({element, "vertex-kind",
                           "vertex kind '" + std::string(to_string(v.kind)) + "' is not allowed in a " +
                               std::string(to_string(g.kind)) + " graph"});
        }
        check_text(out, element, v.id);
        check_text(out, element, v.label);
        check_attributes(out, element, v.attributes);
    }

    std::set<std::string> arrow_ids;
    for (const Arrow& a : g.arrows) {
        const std::string element = "arrow " + a.id;
        if (a.id.empty()) {
            out.push_back({"arrow <empty>", "non-empty-id", "arrow id is empty"});
        } else if (!arrow_ids.insert(a.id).second) {
            out.push_back({element, "unique-arrow-id", "duplicate arrow id '" + a.id + "'"});
        }
        if (!vertex_ids.count(a.src)) {
            out.push_back({element, "arrow-endpoint", "source '" + a.src + "' is not a vertex"});
        }
        if (!vertex_ids.count(a.tgt)) {
            out.push_back({element, "arrow-endpoint", "target '" + a.tgt + "' is not a vertex"});
        }
        if (g.kind == GraphKind::Requirements &&
            (a.relation == kPrerequisiteRelation || a.relation == kRefinementRelation)) {
            const Vertex* s = g.find_vertex(a.src);
            const Vertex* t = g.find_vertex(a.tgt);
            if ((s && s->kind != VertexKind::Requirement) || (t && t->kind != VertexKind::Requirement)) {
                out.push_back({element, "requirement-relation",
                               "'" + a.relation + "' must connect two requirement vertices"});
            }
        }
        check_text(out, element, a.id);
        check_text(out, element, a.src);
        check_text(out, element, a.tgt);
        check_text(out, element, a.relation);
        check_attributes(out, element, a.attributes);
    }

    if (carries_descriptors(g.kind)) {
        for (const std::string& id : vertex_ids) {
            if (arrow_ids.count(id)) {
                out.push_back({id, "owner-id-ambiguous",
                               "id '" + id + "' names both a vertex and an arrow"});
            }
        }
    }

    std::set<OwnerRef> owners;
    for (const DescriptorSet& set : g.descriptors) {
        const std::string element = "descriptors of " + owner_name(set.owner);
        if (!carries_descriptors(g.kind)) {
            out.push_back({element, "descriptor-graph-kind",
                           "descriptors are only allowed in Sigma and S graphs"});
        }
        const bool exists = set.owner.type == ElementType::Vertex ? vertex_ids.count(set.owner.id) > 0
                                                                   : arrow_ids.count(set.owner.id) > 0;
        if (!exists) {
            out.push_back({element, "descriptor-owner", "owner does not exist"});
        }
        if (!owners.insert(set.owner).second) {
            out.push_back({element, "descriptor-single-set", "owner has more than one descriptor set"});
        }
        check_text(out, element, set.ns);
        std::set<std::string> keys;
        for (const DescriptorEntry& e : set.entries) {
            if (e.key.empty()) {
                out.push_back({element, "descriptor-key", "descriptor entry with empty key"});
            } else if (!keys.insert(e.key).second) {
                out.push_back({element, "descriptor-unique-key",
                               "key '" + e.key + "' repeated within namespace '" + set.ns + "'"});
            }
            check_text(out, element, e.key);
            check_text(out, element, e.value);
        }
    }
    return out;
}

std::vector<Violation> validate(const LabeledGraph& s, const SourceGraphs& sources) {
    std::vector<Violation> out = validate(s);
    if (s.kind != GraphKind::Mission) {
        out.push_back({"graph", "graph-kind", "composition invariants apply to S graphs only"});
        return out;
    }
    const std::array<const LabeledGraph*, 3> graphs{sources.requirements, sources.function,
                                                    sources.structure};
    for (const Vertex& v : s.vertices) {
        int hits = 0;
        const Vertex* origin = nullptr;
        for (const LabeledGraph* src : graphs) {
            if (!src) continue;
            if (const Vertex* found = src->find_vertex(v.id)) {
                ++hits;
                origin = found;
            }
        }
        if (hits == 0) {
            out.push_back({"vertex " + v.id, "vertex-subset",
                           "vertex '" + v.id + "' does not occur in R, F or Sigma"});
        } else if (hits > 1) {
            out.push_back({"vertex " + v.id, "vertex-subset",
                           "vertex '" + v.id + "' occurs in more than one of R, F, Sigma"});
        } else if (origin->kind != v.kind) {
            out.push_back({"vertex " + v.id, "vertex-subset",
                           "vertex '" + v.id + "' has a different kind than in its source graph"});
        }
    }
    for (const DescriptorSet& set : s.descriptors) {
        const DescriptorSet* original =
            sources.structure ? sources.structure->descriptors_of(set.owner) : nullptr;
        bool same = false;
        if (original) {
            DescriptorSet a = set;
            DescriptorSet b = *original;
            std::sort(a.entries.begin(), a.entries.end());
            std::sort(b.entries.begin(), b.entries.end());
            same = a == b;
        }
        if (!same) {
            out.push_back({"descriptors of " + owner_name(set.owner), "descriptor-subset",
                           "descriptor set does not appear verbatim in Sigma"});
        }
    }
    return out;
}

} // namespace missionscope::graph
