#include "missionscope/stpa.hpp"

#include "missionscope/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

namespace missionscope::stpa {

namespace {

using nlohmann::json;

const std::regex kLossId(R"(L\d+)");
const std::regex kHazardId(R"(H\d+)");
const std::regex kActionId(R"(CA(\d+\.\d+))");
const std::regex kConstraintId(R"(SC(\d+\.\d+))");

std::string require_string(const json& record, const char* field, const std::string& where) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw FormatError(where + ": field '" + field + "' must be a string");
    }
    return it->get<std::string>();
}

std::vector<std::string> string_list(const json& record, const char* field, const std::string& where,
                                     bool required) {
    auto it = record.find(field);
    if (it == record.end()) {
        if (required) throw FormatError(where + ": field '" + field + "' is required");
        return {};
    }
    if (!it->is_array()) throw FormatError(where + ": field '" + field + "' must be an array");
    std::vector<std::string> out;
    for (const json& item : *it) {
        if (!item.is_string()) throw FormatError(where + ": '" + field + "' entries must be strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

bool flag(const json& record, const char* field) {
    auto it = record.find(field);
    return it != record.end() && it->is_boolean() && it->get<bool>();
}

const json& records(const json& doc, const char* name) {
    static const json empty = json::array();
    auto it = doc.find(name);
    if (it == doc.end()) return empty;
    if (!it->is_array()) throw FormatError(std::string("'") + name + "' must be an array of records");
    return *it;
}

std::optional<ConditionSlot> read_slot(const json& record, const char* field, const std::string& where) {
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_object()) throw FormatError(where + ": slot '" + field + "' must be an object");
    ConditionSlot slot;
    slot.hazards = string_list(*it, "hazards", where + "." + field, true);
    if (auto n = it->find("narrative"); n != it->end()) {
        if (!n->is_string()) throw FormatError(where + "." + field + ": narrative must be a string");
        slot.narrative = n->get<std::string>();
    }
    return slot;
}

std::string suffix(const std::string& id, const std::regex& pattern) {
    std::smatch m;
    return std::regex_match(id, m, pattern) ? m[1].str() : std::string();
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ",";
        out += item;
    }
    return out;
}

void put_slot(graph::AttributeMap& attrs, const char* name, const std::optional<ConditionSlot>& slot) {
    if (!slot) return;
    attrs[std::string(name) + ".hazards"] = join(slot->hazards);
    attrs[std::string(name) + ".narrative"] = slot->narrative;
}

} // namespace

std::vector<std::string> HazardousControlAction::cited_hazards() const {
    std::set<std::string> all;
    for (const auto* slot : {&not_providing, &providing, &incorrect_timing, &stopped_or_too_long}) {
        if (*slot) all.insert((*slot)->hazards.begin(), (*slot)->hazards.end());
    }
    return {all.begin(), all.end()};
}

void check_dataset(const StpaDataset& d) {
    std::set<std::string> losses, hazards, actions, constraints;
    std::set<int> priorities;
    for (const auto& l : d.losses) {
        if (!std::regex_match(l.id, kLossId)) throw FormatError("loss id '" + l.id + "' must match L<number>");
        if (!losses.insert(l.id).second) throw DuplicateError("duplicate loss id '" + l.id + "'");
        if (l.priority < 1) throw FormatError("loss " + l.id + ": priority must be a positive integer");
        if (!priorities.insert(l.priority).second) {
            throw DuplicateError("loss " + l.id + ": priority " + std::to_string(l.priority) +
                                 " is already taken; priorities must not tie");
        }
    }
    for (const auto& h : d.hazards) {
        if (!std::regex_match(h.id, kHazardId)) throw FormatError("hazard id '" + h.id + "' must match H<number>");
        if (!hazards.insert(h.id).second) throw DuplicateError("duplicate hazard id '" + h.id + "'");
        if (h.associated_losses.empty()) throw FormatError("hazard " + h.id + " has no associated losses");
        std::set<std::string> seen;
        for (const auto& l : h.associated_losses) {
            if (!losses.count(l)) throw ReferenceError("hazard " + h.id + " references unknown loss " + l);
            if (!seen.insert(l).second) throw DuplicateError("hazard " + h.id + " lists loss " + l + " twice");
        }
    }
    for (const auto& ca : d.control_actions) {
        if (!std::regex_match(ca.id, kActionId)) {
            throw FormatError("control action id '" + ca.id + "' must match CA<number>.<number>");
        }
        if (!actions.insert(ca.id).second) throw DuplicateError("duplicate control action id '" + ca.id + "'");
        if (!ca.not_providing && !ca.providing && !ca.incorrect_timing && !ca.stopped_or_too_long) {
            throw FormatError("control action " + ca.id + " has no populated condition slot");
        }
        for (const auto& h : ca.cited_hazards()) {
            if (!hazards.count(h)) throw ReferenceError("control action " + ca.id + " references unknown hazard " + h);
        }
    }
    std::map<std::string, std::string> action_by_suffix;
    for (const auto& ca : d.control_actions) action_by_suffix[suffix(ca.id, kActionId)] = ca.id;
    for (const auto& sc : d.safety_constraints) {
        if (!std::regex_match(sc.id, kConstraintId)) {
            throw FormatError("safety constraint id '" + sc.id + "' must match SC<number>.<number>");
        }
        if (!constraints.insert(sc.id).second) throw DuplicateError("duplicate safety constraint id '" + sc.id + "'");
        if (!actions.count(sc.related_control_action)) {
            throw ReferenceError("safety constraint " + sc.id + " references unknown control action " +
                                 sc.related_control_action);
        }
        auto same = action_by_suffix.find(suffix(sc.id, kConstraintId));
        if (same != action_by_suffix.end() && same->second != sc.related_control_action) {
            throw ReferenceError("safety constraint " + sc.id + " relates to " + sc.related_control_action +
                                 " but " + same->second + " carries the matching number");
        }
    }
    for (const auto& sc : d.safety_constraints) {
        std::set<std::string> seen;
        for (const auto& child : sc.refined_by) {
            if (!constraints.count(child)) {
                throw ReferenceError("safety constraint " + sc.id + " is refined by unknown constraint " + child);
            }
            if (child == sc.id) throw ReferenceError("safety constraint " + sc.id + " refines itself");
            if (!seen.insert(child).second) {
                throw DuplicateError("safety constraint " + sc.id + " lists refinement " + child + " twice");
            }
        }
    }
}

StpaDataset parse_stpa_tables(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("STPA dataset is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("STPA dataset must be a JSON object");

    StpaDataset d;
    for (const json& r : records(doc, "losses")) {
        const std::string where = "losses[" + std::to_string(d.losses.size()) + "]";
        if (!r.is_object()) throw FormatError(where + " must be an object");
        UnacceptableLoss l;
        l.id = require_string(r, "id", where);
        l.description = require_string(r, "description", where);
        auto p = r.find("priority");
        if (p == r.end() || !p->is_number_integer()) throw FormatError(where + ": priority must be an integer");
        l.priority = p->get<int>();
        l.reconstructed = flag(r, "reconstructed");
        d.losses.push_back(std::move(l));
    }
    for (const json& r : records(doc, "hazards")) {
        const std::string where = "hazards[" + std::to_string(d.hazards.size()) + "]";
        if (!r.is_object()) throw FormatError(where + " must be an object");
        Hazard h;
        h.id = require_string(r, "id", where);
        h.description = require_string(r, "description", where);
        h.worst_case_environment = require_string(r, "worst_case_environment", where);
        h.associated_losses = string_list(r, "associated_losses", where, true);
        h.reconstructed = flag(r, "reconstructed");
        d.hazards.push_back(std::move(h));
    }
    for (const json& r : records(doc, "control_actions")) {
        const std::string where = "control_actions[" + std::to_string(d.control_actions.size()) + "]";
        if (!r.is_object()) throw FormatError(where + " must be an object");
        HazardousControlAction ca;
        ca.id = require_string(r, "id", where);
        ca.name = require_string(r, "name", where);
        ca.not_providing = read_slot(r, "not_providing", where);
        ca.providing = read_slot(r, "providing", where);
        ca.incorrect_timing = read_slot(r, "incorrect_timing", where);
        ca.stopped_or_too_long = read_slot(r, "stopped_or_too_long", where);
        ca.reconstructed = flag(r, "reconstructed");
        d.control_actions.push_back(std::move(ca));
    }
    for (const json& r : records(doc, "safety_constraints")) {
        const std::string where = "safety_constraints[" + std::to_string(d.safety_constraints.size()) + "]";
        if (!r.is_object()) throw FormatError(where + " must be an object");
        SafetyConstraint sc;
        sc.id = require_string(r, "id", where);
        sc.related_control_action = require_string(r, "related_control_action", where);
        sc.text = require_string(r, "text", where);
        sc.refined_by = string_list(r, "refined_by", where, false);
        sc.reconstructed = flag(r, "reconstructed");
        d.safety_constraints.push_back(std::move(sc));
    }
    check_dataset(d);
    return d;
}

StpaDataset documented_records(const StpaDataset& d) {
    StpaDataset out;
    auto keep = [](const auto& r) { return !r.reconstructed; };
    std::copy_if(d.losses.begin(), d.losses.end(), std::back_inserter(out.losses), keep);
    std::copy_if(d.hazards.begin(), d.hazards.end(), std::back_inserter(out.hazards), keep);
    std::copy_if(d.control_actions.begin(), d.control_actions.end(), std::back_inserter(out.control_actions), keep);
    std::set<std::string> kept_constraints;
    for (const auto& sc : d.safety_constraints) {
        if (!sc.reconstructed) kept_constraints.insert(sc.id);
    }
    for (const auto& sc : d.safety_constraints) {
        if (sc.reconstructed) continue;
        SafetyConstraint copy = sc;
        std::erase_if(copy.refined_by, [&](const std::string& id) { return !kept_constraints.count(id); });
        out.safety_constraints.push_back(std::move(copy));
    }
    return out;
}

graph::LabeledGraph project_to_requirements(const StpaDataset& d) {
    graph::LabeledGraph r;
    r.kind = graph::GraphKind::Requirements;
    for (const auto& l : d.losses) {
        graph::Vertex v{l.id, graph::VertexKind::Loss, l.id,
                        {{"description", l.description}, {"priority", std::to_string(l.priority)}}};
        if (l.reconstructed) v.attributes["reconstructed"] = "true";
        r.vertices.push_back(std::move(v));
    }
    for (const auto& h : d.hazards) {
        graph::Vertex v{h.id, graph::VertexKind::Hazard, h.id,
                        {{"description", h.description}, {"worst_case_environment", h.worst_case_environment}}};
        if (h.reconstructed) v.attributes["reconstructed"] = "true";
        r.vertices.push_back(std::move(v));
        for (const auto& l : h.associated_losses) {
            r.arrows.push_back({l + "->" + h.id, l, h.id, std::string(kLossHazardRelation), {}});
        }
    }
    return r;
}

FunctionProjection project_to_function(const StpaDataset& d) {
    FunctionProjection out;
    graph::LabeledGraph& f = out.graph;
    f.kind = graph::GraphKind::Function;
    std::map<std::string, const HazardousControlAction*> actions;
    for (const auto& ca : d.control_actions) {
        actions[ca.id] = &ca;
        graph::Vertex v{ca.id, graph::VertexKind::ControlAction, ca.name, {}};
        put_slot(v.attributes, "not_providing", ca.not_providing);
        put_slot(v.attributes, "providing", ca.providing);
        put_slot(v.attributes, "incorrect_timing", ca.incorrect_timing);
        put_slot(v.attributes, "stopped_or_too_long", ca.stopped_or_too_long);
        if (ca.reconstructed) v.attributes["reconstructed"] = "true";
        f.vertices.push_back(std::move(v));
    }
    for (const auto& sc : d.safety_constraints) {
        graph::Vertex v{sc.id, graph::VertexKind::SafetyConstraint, sc.id, {{"text", sc.text}}};
        if (sc.reconstructed) v.attributes["reconstructed"] = "true";
        f.vertices.push_back(std::move(v));
        f.arrows.push_back({sc.id + "->" + sc.related_control_action, sc.id, sc.related_control_action,
                            std::string(kConstrainsRelation), {}});
        for (const auto& child : sc.refined_by) {
            f.arrows.push_back({sc.id + "->" + child, sc.id, child, std::string(kRefinedByRelation), {}});
        }
        if (auto it = actions.find(sc.related_control_action); it != actions.end()) {
            for (const auto& h : it->second->cited_hazards()) {
                out.hazard_links.push_back({h, sc.id, std::string(kMitigatedByRelation)});
            }
        }
    }
    return out;
}

} // namespace missionscope::stpa
