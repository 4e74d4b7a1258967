#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace missionscope::graph {

// Which of the five mission graphs a LabeledGraph holds. The discriminant
// gates the kind-specific invariants checked by validate().
enum class GraphKind {
    Requirements,   // "R"
    Function,       // "F"
    Structure,      // "Sigma"
    Mission,        // "S"
    AttackVectors,  // "AV"
};

std::string_view to_string(GraphKind kind);
std::optional<GraphKind> parse_graph_kind(std::string_view text);

enum class VertexKind {
    Requirement,
    Loss,
    Hazard,
    ControlAction,
    SafetyConstraint,
    Behavior,
    Component,
    AttackVector,
};

std::string_view to_string(VertexKind kind);
std::optional<VertexKind> parse_vertex_kind(std::string_view text);

// Hierarchy level used for top-to-bottom trace direction: requirement-level
// elements (requirements, losses, hazards) sit at 0, behaviors at 1,
// structure at 2. Attack vectors have no level.
std::optional<int> hierarchy_level(VertexKind kind);

enum class DescriptorCategory {
    InformationFlow,
    Property,
    Functionality,
    NonFunctional,
    InterfaceInteraction,
};

std::string_view to_string(DescriptorCategory category);
std::optional<DescriptorCategory> parse_descriptor_category(std::string_view text);
const std::vector<DescriptorCategory>& all_descriptor_categories();

using AttributeMap = std::map<std::string, std::string>;

struct Vertex {
    std::string id;
    VertexKind kind = VertexKind::Component;
    std::string label;
    AttributeMap attributes;

    bool operator==(const Vertex&) const = default;
};

struct Arrow {
    std::string id;
    std::string src;
    std::string tgt;
    std::string relation;
    AttributeMap attributes;

    bool operator==(const Arrow&) const = default;
};

enum class ElementType { Vertex, Arrow };

struct OwnerRef {
    ElementType type = ElementType::Vertex;
    std::string id;

    auto operator<=>(const OwnerRef&) const = default;
};

struct DescriptorEntry {
    DescriptorCategory category = DescriptorCategory::Property;
    std::string key;
    std::string value;

    auto operator<=>(const DescriptorEntry&) const = default;
};

// Security attributes of one structural element. The namespace keeps two
// components with identical attributes distinguishable.
struct DescriptorSet {
    OwnerRef owner;
    std::string ns;
    std::vector<DescriptorEntry> entries;

    bool operator==(const DescriptorSet&) const = default;
};

struct LabeledGraph {
    GraphKind kind = GraphKind::Structure;
    AttributeMap attributes;  // graph-level data that has no reserved meaning
    std::vector<Vertex> vertices;
    std::vector<Arrow> arrows;
    std::vector<DescriptorSet> descriptors;

    const Vertex* find_vertex(std::string_view id) const;
    const Arrow* find_arrow(std::string_view id) const;
    const DescriptorSet* descriptors_of(const OwnerRef& owner) const;
    // Resolves a component id against vertices first, then arrows.
    std::optional<OwnerRef> resolve_owner(std::string_view id) const;
};

// Sorted copy: vertices and arrows by id, descriptor sets by owner, entries
// by (category, key). Two graphs are structurally equal iff their canonical
// forms compare equal.
LabeledGraph canonical(LabeledGraph g);
bool structurally_equal(const LabeledGraph& a, const LabeledGraph& b);

// Id -> position lookups plus in/out adjacency (arrow positions), built once
// for the algorithms that walk a graph repeatedly.
class GraphIndex {
public:
    explicit GraphIndex(const LabeledGraph& g);

    const LabeledGraph& graph() const noexcept { return *graph_; }
    std::optional<std::size_t> vertex_pos(std::string_view id) const;
    std::optional<std::size_t> arrow_pos(std::string_view id) const;
    const std::vector<std::size_t>& out_arrows(std::size_t vertex) const { return out_[vertex]; }
    const std::vector<std::size_t>& in_arrows(std::size_t vertex) const { return in_[vertex]; }

private:
    const LabeledGraph* graph_;
    std::unordered_map<std::string, std::size_t> vertex_pos_;
    std::unordered_map<std::string, std::size_t> arrow_pos_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

struct Violation {
    std::string element;    // offending vertex/arrow/descriptor id
    std::string invariant;  // stable tag, e.g. "arrow-endpoint"
    std::string message;

    bool operator==(const Violation&) const = default;
};

// Graph-level invariants of every kind (ids, endpoints, vertex kinds,
// descriptor placement and uniqueness, XML-representable text).
std::vector<Violation> validate(const LabeledGraph& g);

struct SourceGraphs {
    const LabeledGraph* requirements = nullptr;
    const LabeledGraph* function = nullptr;
    const LabeledGraph* structure = nullptr;
};

// validate(g) plus the composition invariants of a mission specification:
// every vertex comes from exactly one source graph, and every descriptor set
// appears verbatim in the structure graph.
std::vector<Violation> validate(const LabeledGraph& s, const SourceGraphs& sources);

// Attribute keys starting with this prefix are reserved for the GraphML codec.
inline constexpr std::string_view kReservedPrefix = "ma.";

// Relations with fixed endpoint semantics in requirement graphs.
inline constexpr std::string_view kPrerequisiteRelation = "prerequisite";
inline constexpr std::string_view kRefinementRelation = "refinement";

// Relation for structural containment (aggregate -> part).
inline constexpr std::string_view kContainsRelation = "contains";

} // namespace missionscope::graph
