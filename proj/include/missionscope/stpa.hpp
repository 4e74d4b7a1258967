#pragma once

#include "missionscope/compose.hpp"
#include "missionscope/graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace missionscope::stpa {

struct UnacceptableLoss {
    std::string id;  // L<n>
    std::string description;
    int priority = 0;  // 1 = highest, unique across the dataset
    bool reconstructed = false;
};

struct Hazard {
    std::string id;  // H<n>
    std::string description;
    std::string worst_case_environment;
    std::vector<std::string> associated_losses;
    bool reconstructed = false;
};

// One column of the hazardous-control-action table: the hazards the
// condition leads to and the analyst's narrative, kept verbatim.
struct ConditionSlot {
    std::vector<std::string> hazards;
    std::string narrative;
};

struct HazardousControlAction {
    std::string id;  // CA<n>.<m>
    std::string name;
    std::optional<ConditionSlot> not_providing;
    std::optional<ConditionSlot> providing;
    std::optional<ConditionSlot> incorrect_timing;
    std::optional<ConditionSlot> stopped_or_too_long;
    bool reconstructed = false;

    // Union of the hazards cited in any slot, sorted.
    std::vector<std::string> cited_hazards() const;
};

struct SafetyConstraint {
    std::string id;  // SC<n>.<m>
    std::string related_control_action;
    std::string text;
    // Lower-level constraints that refine this one (SC -> SC, top-to-bottom).
    std::vector<std::string> refined_by;
    bool reconstructed = false;
};

struct StpaDataset {
    std::vector<UnacceptableLoss> losses;
    std::vector<Hazard> hazards;
    std::vector<HazardousControlAction> control_actions;
    std::vector<SafetyConstraint> safety_constraints;
};

// Parses and cross-validates the JSON dataset format (see docs/formats.md).
// Throws FormatError, DuplicateError or ReferenceError.
StpaDataset parse_stpa_tables(std::string_view document);

// Throws on the first violated dataset invariant.
void check_dataset(const StpaDataset& dataset);

// The dataset without records flagged "reconstructed".
StpaDataset documented_records(const StpaDataset& dataset);

inline constexpr std::string_view kLossHazardRelation = "can-be-caused-by";
inline constexpr std::string_view kConstrainsRelation = "constrains";
inline constexpr std::string_view kMitigatedByRelation = "mitigated-by";
inline constexpr std::string_view kRefinedByRelation = "refined-by";

// R fragment: one vertex per loss and hazard, one loss -> hazard arrow per
// association.
graph::LabeledGraph project_to_requirements(const StpaDataset& dataset);

struct FunctionProjection {
    // Control actions, safety constraints, SC -> CA and SC -> SC arrows.
    graph::LabeledGraph graph;
    // Hazard -> safety constraint links. Their sources live in R, so they
    // are returned as trace candidates rather than arrows of F.
    std::vector<graph::TraceLink> hazard_links;
};

FunctionProjection project_to_function(const StpaDataset& dataset);

} // namespace missionscope::stpa
