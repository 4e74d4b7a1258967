#include "missionscope/impact.hpp"

#include "missionscope/error.hpp"
#include "missionscope/vuln.hpp"

#include "json.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <set>
#include <sstream>

namespace missionscope::impact {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> attack_set_for(const std::vector<std::string>& relevant) {
    std::vector<std::string> cves;
    for (const auto& id : relevant) {
        if (vuln::source_of_id(id) == vuln::Source::CVE) cves.push_back(id);
    }
    std::vector<std::string> out = cves.empty() ? relevant : cves;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> arrow_sequence(const VulnerablePath& p, std::size_t from, std::size_t count) {
    std::vector<std::string> out;
    for (std::size_t i = from; i < from + count; ++i) out.push_back(p.hops[i].arrow);
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::optional<int> loss_priority(const graph::Vertex& v) {
    auto it = v.attributes.find("priority");
    if (it == v.attributes.end()) return std::nullopt;
    try {
        std::size_t used = 0;
        const int p = std::stoi(it->second, &used);
        if (used == it->second.size()) return p;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

std::string attribute_or(const graph::Vertex& v, const std::string& key, std::string fallback) {
    auto it = v.attributes.find(key);
    return it == v.attributes.end() ? fallback : it->second;
}

ordered_json path_json(const VulnerablePath& p) {
    ordered_json hops = ordered_json::array();
    for (const auto& h : p.hops) hops.push_back({{"arrow", h.arrow}, {"attacks", h.attack_set}});
    return {{"length", p.length()}, {"vertices", p.vertices}, {"hops", hops}};
}

std::string render_path(const VulnerablePath& p) {
    std::string out = p.vertices.front();
    for (std::size_t i = 0; i < p.hops.size(); ++i) {
        out += " -[" + join(p.hops[i].attack_set, " | ") + "]-> " + p.vertices[i + 1];
    }
    return out;
}

} // namespace

std::vector<VulnerablePath> PathSet::of_length(std::size_t n) const {
    std::vector<VulnerablePath> out;
    for (const auto& p : paths) {
        if (p.length() == n) out.push_back(p);
    }
    return out;
}

PathSet find_vulnerable_paths(const graph::LabeledGraph& sigma, const evidence::RelevanceMap& relevant, long max_len) {
    if (max_len < 0) throw DomainError("max_len must be non-negative, got " + std::to_string(max_len));
    const graph::GraphIndex index(sigma);
    auto relevant_for = [&](const std::string& id) -> const std::vector<std::string>* {
        auto it = relevant.find(id);
        return it == relevant.end() || it->second.empty() ? nullptr : &it->second;
    };

    std::vector<const std::vector<std::string>*> attested(sigma.arrows.size());
    for (std::size_t a = 0; a < sigma.arrows.size(); ++a) attested[a] = relevant_for(sigma.arrows[a].id);

    PathSet out;
    for (const auto& v : sigma.vertices) {
        if (relevant_for(v.id)) out.paths.push_back({{v.id}, {}});
    }

    const std::size_t limit = static_cast<std::size_t>(max_len);
    std::vector<bool> on_path(sigma.vertices.size(), false);
    VulnerablePath current;
    auto extend = [&](auto&& self, std::size_t v) -> void {
        if (current.hops.size() == limit) return;
        for (std::size_t a : index.out_arrows(v)) {
            if (!attested[a]) continue;
            const std::size_t w = *index.vertex_pos(sigma.arrows[a].tgt);
            if (on_path[w]) continue;
            on_path[w] = true;
            current.vertices.push_back(sigma.vertices[w].id);
            current.hops.push_back({sigma.arrows[a].id, attack_set_for(*attested[a])});
            out.paths.push_back(current);
            self(self, w);
            current.hops.pop_back();
            current.vertices.pop_back();
            on_path[w] = false;
        }
    };
    for (std::size_t v = 0; v < sigma.vertices.size(); ++v) {
        on_path[v] = true;
        current = {{sigma.vertices[v].id}, {}};
        extend(extend, v);
        on_path[v] = false;
    }

    std::sort(out.paths.begin(), out.paths.end(), [](const VulnerablePath& a, const VulnerablePath& b) {
        if (a.length() != b.length()) return a.length() < b.length();
        return a < b;
    });
    out.paths.erase(std::unique(out.paths.begin(), out.paths.end()), out.paths.end());
    return out;
}

std::vector<VulnerablePath> maximal_chains(const PathSet& paths) {
    std::set<std::vector<std::string>> extendable;
    for (const auto& p : paths.paths) {
        if (p.length() < 2) continue;
        extendable.insert(arrow_sequence(p, 0, p.length() - 1));
        extendable.insert(arrow_sequence(p, 1, p.length() - 1));
    }
    std::vector<VulnerablePath> out;
    for (const auto& p : paths.paths) {
        if (p.length() >= 1 && !extendable.count(arrow_sequence(p, 0, p.length()))) out.push_back(p);
    }
    return out;
}

std::vector<ImpactTrace> TraceSet::of_length(std::size_t n) const {
    std::vector<ImpactTrace> out;
    for (const auto& t : traces) {
        if (t.length() == n) out.push_back(t);
    }
    return out;
}

TraceSet find_impact_traces(const graph::LabeledGraph& s, const PathSet& vulnerable) {
    if (std::none_of(s.vertices.begin(), s.vertices.end(),
                     [](const graph::Vertex& v) { return v.kind == graph::VertexKind::Loss; })) {
        throw ConfigError("S has no loss vertex; impact is undefined");
    }
    const graph::GraphIndex index(s);
    using Kind = graph::VertexKind;

    std::set<std::string> origins;
    for (const auto& p : vulnerable.paths) {
        if (p.length() == 0) origins.insert(p.start());
    }

    TraceSet out;
    std::map<std::pair<std::vector<std::string>, std::vector<std::string>>, std::set<std::string>> found;

    for (const auto& origin : origins) {
        auto pos = index.vertex_pos(origin);
        if (!pos || s.vertices[*pos].kind != Kind::Component) {
            out.untraced.push_back(origin);
            continue;
        }
        // The origin and every aggregate containing it, transitively.
        std::vector<std::size_t> lifted{*pos};
        std::set<std::size_t> seen{*pos};
        for (std::size_t i = 0; i < lifted.size(); ++i) {
            for (std::size_t a : index.in_arrows(lifted[i])) {
                if (s.arrows[a].relation != graph::kContainsRelation) continue;
                const std::size_t u = *index.vertex_pos(s.arrows[a].src);
                if (s.vertices[u].kind == Kind::Component && seen.insert(u).second) lifted.push_back(u);
            }
        }

        for (std::size_t start : lifted) {
            std::vector<bool> on_path(s.vertices.size(), false);
            std::vector<std::string> vertices{s.vertices[start].id};
            std::vector<std::string> arrows;
            on_path[start] = true;
            auto walk = [&](auto&& self, std::size_t v) -> void {
                for (std::size_t a : index.in_arrows(v)) {
                    const std::size_t u = *index.vertex_pos(s.arrows[a].src);
                    if (on_path[u]) continue;
                    const Kind kind = s.vertices[u].kind;
                    if (kind == Kind::Component || kind == Kind::AttackVector) continue;
                    vertices.push_back(s.vertices[u].id);
                    arrows.push_back(s.arrows[a].id);
                    if (kind == Kind::Loss) {
                        found[{vertices, arrows}].insert(origin);
                    } else {
                        on_path[u] = true;
                        self(self, u);
                        on_path[u] = false;
                    }
                    vertices.pop_back();
                    arrows.pop_back();
                }
            };
            walk(walk, start);
        }
    }

    for (auto& [key, from] : found) {
        out.traces.push_back({key.first, key.second, std::vector<std::string>(from.begin(), from.end())});
    }
    std::sort(out.traces.begin(), out.traces.end(), [](const ImpactTrace& a, const ImpactTrace& b) {
        if (a.length() != b.length()) return a.length() < b.length();
        return std::tie(a.vertices, a.arrows) < std::tie(b.vertices, b.arrows);
    });
    return out;
}

MissionImpactReport mission_impact(const ImpactInputs& in, long max_len, std::size_t k) {
    if (!in.s || !in.sigma || !in.av || !in.candidates || !in.relevant) {
        throw PreconditionError("mission_impact needs S, Sigma, AV, candidates and relevant evidence");
    }
    MissionImpactReport report;
    report.max_len = max_len;
    report.k = k;
    report.paths = find_vulnerable_paths(*in.sigma, evidence::relevance_map(*in.relevant), max_len);
    report.chains = maximal_chains(report.paths);
    report.traces = find_impact_traces(*in.s, report.paths);

    std::vector<const graph::Vertex*> losses;
    for (const auto& v : in.s->vertices) {
        if (v.kind == graph::VertexKind::Loss) losses.push_back(&v);
    }
    std::sort(losses.begin(), losses.end(), [](const graph::Vertex* a, const graph::Vertex* b) {
        const auto pa = loss_priority(*a);
        const auto pb = loss_priority(*b);
        if (pa.has_value() != pb.has_value()) return pa.has_value();
        if (pa && *pa != *pb) return *pa < *pb;
        return a->id < b->id;
    });
    for (const auto* v : losses) {
        LossGroup group{v->id, attribute_or(*v, "description", v->label), loss_priority(*v), {}};
        for (std::size_t i = 0; i < report.traces.traces.size(); ++i) {
            if (report.traces.traces[i].loss() == v->id) group.traces.push_back(i);
        }
        report.losses.push_back(std::move(group));
    }

    for (const auto& [component, e] : *in.relevant) {
        if (e.base.empty()) continue;
        ComponentSummary summary;
        summary.component = component;
        if (const auto* v = in.s->find_vertex(component)) {
            summary.label = v->label;
        } else if (const auto* a = in.s->find_arrow(component)) {
            summary.label = a->src + " -> " + a->tgt;
        }
        const evidence::ComponentCandidates* cands = nullptr;
        if (auto it = in.candidates->find(component); it != in.candidates->end()) cands = &it->second;
        if (cands) summary.candidate_count = cands->candidates.size();
        for (const auto& id : e.base) {
            AttackRef ref{id, "", id, ""};
            if (const auto* v = in.av->find_vertex(id)) {
                const auto entry = vuln::entry_from_vertex(*v);
                ref.source = std::string(vuln::to_string(entry.source));
                ref.title = entry.title;
                // CVE records have no name; use the start of the summary.
                if (ref.title == id && !entry.description.empty()) {
                    ref.title = entry.description.size() > 80 ? entry.description.substr(0, 77) + "..."
                                                              : entry.description;
                }
            }
            if (cands) {
                for (const auto& c : cands->candidates) {
                    if (c.attack_id == id) ref.related_via = c.related_via;
                }
            }
            summary.relevant.push_back(std::move(ref));
        }
        summary.combinations = e.combinations;
        report.components.push_back(std::move(summary));
    }

    for (const auto& t : report.traces.traces) {
        for (const auto& id : t.vertices) {
            if (const auto* v = in.s->find_vertex(id)) report.elements.emplace(id, *v);
        }
    }
    for (const auto& p : report.paths.paths) {
        for (const auto& id : p.vertices) {
            if (const auto* v = in.sigma->find_vertex(id)) report.elements.emplace(id, *v);
        }
    }
    return report;
}

std::string report_json(const MissionImpactReport& report) {
    ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["parameters"] = {{"max_len", report.max_len}, {"k", report.k}};
    doc["summary"] = {
        {"mission_at_risk", !report.paths.empty()},
        {"vulnerable_paths", report.paths.paths.size()},
        {"chains", report.chains.size()},
        {"impact_traces", report.traces.traces.size()},
    };

    ordered_json paths = ordered_json::array();
    for (const auto& p : report.paths.paths) paths.push_back(path_json(p));
    doc["vulnerable_paths"] = paths;
    ordered_json chains = ordered_json::array();
    for (const auto& p : report.chains) chains.push_back(path_json(p));
    doc["chains"] = chains;

    ordered_json traces = ordered_json::array();
    for (const auto& t : report.traces.traces) {
        traces.push_back({{"length", t.length()}, {"vertices", t.vertices}, {"arrows", t.arrows},
                          {"origins", t.origins}, {"loss", t.loss()}});
    }
    doc["impact_traces"] = traces;
    doc["untraced"] = report.traces.untraced;

    ordered_json losses = ordered_json::array();
    for (const auto& g : report.losses) {
        ordered_json entry = {{"id", g.loss}, {"description", g.description}};
        entry["priority"] = g.priority ? ordered_json(*g.priority) : ordered_json(nullptr);
        entry["traces"] = g.traces;
        losses.push_back(entry);
    }
    doc["losses"] = losses;

    ordered_json components = ordered_json::array();
    for (const auto& c : report.components) {
        ordered_json relevant = ordered_json::array();
        for (const auto& r : c.relevant) {
            ordered_json ref = {{"id", r.id}, {"source", r.source}, {"title", r.title}};
            if (!r.related_via.empty()) ref["related_via"] = r.related_via;
            relevant.push_back(ref);
        }
        components.push_back({{"component", c.component}, {"label", c.label},
                              {"candidates", c.candidate_count}, {"relevant", relevant},
                              {"combinations", c.combinations}});
    }
    doc["components"] = components;

    ordered_json elements = ordered_json::object();
    for (const auto& [id, v] : report.elements) {
        ordered_json attrs = ordered_json::object();
        for (const auto& [key, value] : v.attributes) attrs[key] = value;
        elements[id] = {{"kind", graph::to_string(v.kind)}, {"label", v.label}, {"attributes", attrs}};
    }
    doc["elements"] = elements;
    return doc.dump(2) + "\n";
}

std::string report_text(const MissionImpactReport& report) {
    std::ostringstream out;
    out << "Mission impact report (max_len " << report.max_len << ", k " << report.k << ")\n";
    out << "Mission at risk: " << (report.paths.empty() ? "no" : "yes") << "\n\n";

    out << "Vulnerable Path (" << report.chains.size() << " chains)\n";
    if (report.chains.empty()) out << "  none\n";
    for (std::size_t i = 0; i < report.chains.size(); ++i) {
        out << "  p" << i + 1 << "  " << render_path(report.chains[i]) << "\n";
    }
    std::vector<std::string> vulnerable;
    for (const auto& p : report.paths.of_length(0)) vulnerable.push_back(p.start());
    out << "  vulnerable vertices: " << (vulnerable.empty() ? "none" : join(vulnerable, ", ")) << "\n\n";

    std::size_t width = 5;
    for (const auto& t : report.traces.traces) width = std::max(width, join(t.vertices, " -> ").size());
    const int column = static_cast<int>(width + 2);
    out << "Impact Trace (" << report.traces.traces.size() << " traces)\n";
    out << "  " << std::left << std::setw(4) << "#" << std::setw(5) << "len" << std::setw(column) << "trace"
        << "origin\n";
    for (std::size_t i = 0; i < report.traces.traces.size(); ++i) {
        const auto& t = report.traces.traces[i];
        out << "  " << std::left << std::setw(4) << i + 1 << std::setw(5) << t.length() << std::setw(column)
            << join(t.vertices, " -> ") << join(t.origins, ", ") << "\n";
    }
    if (!report.traces.untraced.empty()) {
        out << "  not in S: " << join(report.traces.untraced, ", ") << "\n";
    }
    out << "\n";

    out << "Losses by priority\n";
    for (const auto& g : report.losses) {
        out << "  " << g.loss << " (priority " << (g.priority ? std::to_string(*g.priority) : "-") << "): "
            << g.traces.size() << " traces  " << g.description << "\n";
    }
    out << "\n";

    out << "Relevant evidence\n";
    if (report.components.empty()) out << "  none\n";
    for (const auto& c : report.components) {
        out << "  " << c.component << " (" << c.relevant.size() << " of " << c.candidate_count
            << " candidates)\n";
        for (const auto& r : c.relevant) {
            out << "    " << std::left << std::setw(16) << r.id << std::setw(7) << r.source << r.title;
            if (!r.related_via.empty()) out << "  [via " << r.related_via << "]";
            out << "\n";
        }
        for (const auto& combo : c.combinations) {
            if (combo.size() > 1) out << "    combined: {" << join(combo, ", ") << "}\n";
        }
    }
    return out.str();
}

} // namespace missionscope::impact
