#include "missionscope/vuln.hpp"

#include "missionscope/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace missionscope::vuln {

namespace {

using nlohmann::json;

const std::regex kCvePattern(R"(CVE-\d{4}-\d{4,})");
const std::regex kCwePattern(R"(CWE-\d+)");
const std::regex kCapecPattern(R"(CAPEC-\d+)");

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Reads an optional array of strings; returns an error message on bad shape.
std::optional<std::string> read_ids(const json& record, const char* field, std::vector<std::string>& out) {
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_array()) return std::string("'") + field + "' must be an array";
    for (const json& item : *it) {
        if (!item.is_string()) return std::string("'") + field + "' entries must be strings";
        out.push_back(item.get<std::string>());
    }
    return std::nullopt;
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ' ';
        out += id;
    }
    return out;
}

std::vector<std::string> split_ids(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    for (std::string id; in >> id;) out.push_back(id);
    return out;
}

IngestResult ingest_cve(std::string_view doc) {
    IngestResult result;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= doc.size()) {
        const std::size_t end = std::min(doc.find('\n', pos), doc.size());
        const std::string_view line = doc.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) {
            if (end == doc.size()) break;
            continue;
        }
        const std::string location = "line " + std::to_string(line_no);
        auto reject = [&](std::string id, std::string reason) {
            result.rejects.push_back({Source::CVE, location, std::move(id), std::move(reason)});
        };
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            reject("", "not a JSON object");
        } else {
            AttackVectorEntry e;
            e.source = Source::CVE;
            auto id = record.find("id");
            auto summary = record.find("summary");
            if (id == record.end() || !id->is_string()) {
                reject("", "missing 'id'");
            } else if (e.id = id->get<std::string>(); !std::regex_match(e.id, kCvePattern)) {
                reject(e.id, "id does not match CVE-YYYY-NNNN");
            } else if (summary == record.end() || !summary->is_string() ||
                       is_blank(summary->get<std::string>())) {
                reject(e.id, "missing or empty 'summary'");
            } else if (auto bad = read_ids(record, "cwe_refs", e.cross_refs)) {
                reject(e.id, *bad);
            } else if (!seen.insert(e.id).second) {
                reject(e.id, "duplicate id");
            } else {
                e.title = e.id;
                e.description = summary->get<std::string>();
                result.entries.push_back(std::move(e));
            }
        }
        if (end == doc.size()) break;
    }
    return result;
}

IngestResult ingest_array(std::string_view doc, Source source) {
    IngestResult result;
    if (is_blank(doc)) return result;
    const std::regex& pattern = source == Source::CWE ? kCwePattern : kCapecPattern;
    const char* cross_field = source == Source::CWE ? "capec_refs" : "cwe_refs";

    json records = json::parse(doc, nullptr, false);
    if (records.is_discarded() || !records.is_array()) {
        result.rejects.push_back({source, "document", "", "document is not a JSON array of records"});
        return result;
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const json& record = records[i];
        const std::string location = "record " + std::to_string(i);
        auto reject = [&](std::string id, std::string reason) {
            result.rejects.push_back({source, location, std::move(id), std::move(reason)});
        };
        if (!record.is_object()) {
            reject("", "not a JSON object");
            continue;
        }
        AttackVectorEntry e;
        e.source = source;
        auto id = record.find("id");
        if (id == record.end() || !id->is_string()) {
            reject("", "missing 'id'");
            continue;
        }
        e.id = id->get<std::string>();
        if (!std::regex_match(e.id, pattern)) {
            reject(e.id, std::string("id does not match ") + (source == Source::CWE ? "CWE-N" : "CAPEC-N"));
            continue;
        }
        auto name = record.find("name");
        auto description = record.find("description");
        if (name == record.end() || !name->is_string() || is_blank(name->get<std::string>())) {
            reject(e.id, "missing or empty 'name'");
            continue;
        }
        if (description == record.end() || !description->is_string() ||
            is_blank(description->get<std::string>())) {
            reject(e.id, "missing or empty 'description'");
            continue;
        }
        if (auto bad = read_ids(record, "parents", e.parents)) {
            reject(e.id, *bad);
            continue;
        }
        if (auto related = record.find("related"); related != record.end() && !related->is_null()) {
            if (!related->is_object()) {
                reject(e.id, "'related' must be an object");
                continue;
            }
            if (auto bad = read_ids(*related, cross_field, e.cross_refs)) {
                reject(e.id, *bad);
                continue;
            }
            if (auto bad = read_ids(*related, "other", e.related)) {
                reject(e.id, *bad);
                continue;
            }
        }
        if (!seen.insert(e.id).second) {
            reject(e.id, "duplicate id");
            continue;
        }
        e.title = name->get<std::string>();
        e.description = description->get<std::string>();
        result.entries.push_back(std::move(e));
    }
    return result;
}

} // namespace

std::string_view to_string(Source source) {
    switch (source) {
    case Source::CVE: return "CVE";
    case Source::CWE: return "CWE";
    case Source::CAPEC: return "CAPEC";
    }
    return "?";
}

std::optional<Source> parse_source(std::string_view text) {
    if (text == "CVE") return Source::CVE;
    if (text == "CWE") return Source::CWE;
    if (text == "CAPEC") return Source::CAPEC;
    return std::nullopt;
}

std::optional<Source> source_of_id(std::string_view id) {
    const std::string s(id);
    if (std::regex_match(s, kCvePattern)) return Source::CVE;
    if (std::regex_match(s, kCwePattern)) return Source::CWE;
    if (std::regex_match(s, kCapecPattern)) return Source::CAPEC;
    return std::nullopt;
}

int concreteness_rank(Source source) { return static_cast<int>(source); }

std::vector<std::string> AttackVectorEntry::references() const {
    std::vector<std::string> out = parents;
    out.insert(out.end(), cross_refs.begin(), cross_refs.end());
    out.insert(out.end(), related.begin(), related.end());
    return out;
}

std::size_t IngestResult::count(Source source) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.source == source; }));
}

IngestResult ingest_snapshot(std::string_view cve_doc, std::string_view cwe_doc, std::string_view capec_doc) {
    auto cve = std::async(std::launch::async, [&] { return ingest_cve(cve_doc); });
    auto cwe = std::async(std::launch::async, [&] { return ingest_array(cwe_doc, Source::CWE); });
    auto capec = std::async(std::launch::async, [&] { return ingest_array(capec_doc, Source::CAPEC); });

    IngestResult merged;
    for (auto* part : {&cve, &cwe, &capec}) {
        IngestResult r = part->get();
        std::move(r.entries.begin(), r.entries.end(), std::back_inserter(merged.entries));
        std::move(r.rejects.begin(), r.rejects.end(), std::back_inserter(merged.rejects));
    }
    return merged;
}

AttackVectorSpace build_av_graph(std::span<const AttackVectorEntry> entries) {
    AttackVectorSpace out;
    graph::LabeledGraph& g = out.graph;
    g.kind = graph::GraphKind::AttackVectors;

    std::map<std::string, const AttackVectorEntry*> by_id;
    for (const auto& e : entries) by_id.emplace(e.id, &e);

    for (const auto& [id, e] : by_id) {
        graph::Vertex v{e->id, graph::VertexKind::AttackVector, e->title, {}};
        v.attributes[std::string(kAttrSource)] = std::string(to_string(e->source));
        v.attributes[std::string(kAttrTitle)] = e->title;
        v.attributes[std::string(kAttrDescription)] = e->description;
        if (!e->parents.empty()) v.attributes[std::string(kAttrParents)] = join_ids(e->parents);
        if (!e->cross_refs.empty()) v.attributes[std::string(kAttrCrossRefs)] = join_ids(e->cross_refs);
        if (!e->related.empty()) v.attributes[std::string(kAttrRelated)] = join_ids(e->related);
        g.vertices.push_back(std::move(v));
    }

    std::map<std::string, graph::Arrow> arrows;
    auto link = [&](const std::string& src, const std::string& tgt, std::string_view tag, bool intra) {
        graph::Arrow a{src + " " + std::string(tag) + " " + tgt, src, tgt, std::string(tag), {}};
        a.attributes[std::string(kAttrScope)] = std::string(intra ? kIntraRelationship : kInterRelationship);
        arrows.emplace(a.id, std::move(a));
    };
    auto resolve = [&](const AttackVectorEntry& from, const std::string& ref, Source want) -> bool {
        auto it = by_id.find(ref);
        if (it == by_id.end()) {
            out.warnings.push_back(from.id + " references " + ref + ", which is not in the snapshot");
            return false;
        }
        if (it->second->source != want) {
            out.warnings.push_back(from.id + " references " + ref + " where a " +
                                   std::string(to_string(want)) + " entry was expected");
            return false;
        }
        return true;
    };

    for (const auto& [id, e] : by_id) {
        for (const auto& parent : e->parents) {
            if (e->source == Source::CVE) {
                out.warnings.push_back(e->id + " lists a parent; CVE entries have no hierarchy");
            } else if (resolve(*e, parent, e->source)) {
                link(e->id, parent, kChildOf, true);
            }
        }
        for (const auto& ref : e->cross_refs) {
            switch (e->source) {
            case Source::CVE:
                if (resolve(*e, ref, Source::CWE)) link(e->id, ref, kWeaknessOf, false);
                break;
            case Source::CWE:
                if (resolve(*e, ref, Source::CAPEC)) link(e->id, ref, kPatternOf, false);
                break;
            case Source::CAPEC:
                if (resolve(*e, ref, Source::CWE)) link(ref, e->id, kPatternOf, false);
                break;
            }
        }
    }
    for (auto& [id, a] : arrows) g.arrows.push_back(std::move(a));
    return out;
}

AttackVectorEntry entry_from_vertex(const graph::Vertex& v) {
    AttackVectorEntry e;
    e.id = v.id;
    auto get = [&](std::string_view key) {
        auto it = v.attributes.find(std::string(key));
        return it == v.attributes.end() ? std::string() : it->second;
    };
    auto source = parse_source(get(kAttrSource));
    if (!source) source = source_of_id(v.id);
    if (!source) throw FormatError("attack vector '" + v.id + "' has no recognizable source");
    e.source = *source;
    e.title = get(kAttrTitle);
    if (e.title.empty()) e.title = v.label;
    e.description = get(kAttrDescription);
    e.parents = split_ids(get(kAttrParents));
    e.cross_refs = split_ids(get(kAttrCrossRefs));
    e.related = split_ids(get(kAttrRelated));
    return e;
}

std::vector<AttackVectorEntry> entries_from_graph(const graph::LabeledGraph& av) {
    std::vector<AttackVectorEntry> out;
    out.reserve(av.vertices.size());
    for (const auto& v : av.vertices) out.push_back(entry_from_vertex(v));
    return out;
}

graph::LabeledGraph neighborhood(const graph::LabeledGraph& av, std::string_view id, std::size_t depth) {
    const graph::GraphIndex index(av);
    auto start = index.vertex_pos(id);
    if (!start) throw LookupError("attack vector '" + std::string(id) + "' is not in the AV graph");

    std::vector<std::size_t> distance(av.vertices.size(), SIZE_MAX);
    std::deque<std::size_t> queue{*start};
    distance[*start] = 0;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        if (distance[v] == depth) continue;
        auto visit = [&](std::size_t w) {
            if (distance[w] == SIZE_MAX) {
                distance[w] = distance[v] + 1;
                queue.push_back(w);
            }
        };
        for (std::size_t a : index.out_arrows(v)) visit(*index.vertex_pos(av.arrows[a].tgt));
        for (std::size_t a : index.in_arrows(v)) visit(*index.vertex_pos(av.arrows[a].src));
    }

    graph::LabeledGraph sub;
    sub.kind = av.kind;
    std::set<std::string> kept;
    for (std::size_t i = 0; i < av.vertices.size(); ++i) {
        if (distance[i] != SIZE_MAX) {
            sub.vertices.push_back(av.vertices[i]);
            kept.insert(av.vertices[i].id);
        }
    }
    for (const auto& a : av.arrows) {
        if (kept.count(a.src) && kept.count(a.tgt)) sub.arrows.push_back(a);
    }
    return sub;
}

std::vector<graph::Violation> check_av(const graph::LabeledGraph& av) {
    std::vector<graph::Violation> out;
    if (av.kind != graph::GraphKind::AttackVectors) {
        out.push_back({"graph", "graph-kind", "not an AV graph"});
        return out;
    }
    std::map<std::string, Source> sources;
    for (const auto& v : av.vertices) {
        auto by_id = source_of_id(v.id);
        auto it = v.attributes.find(std::string(kAttrSource));
        auto declared = it == v.attributes.end() ? by_id : parse_source(it->second);
        if (!by_id || !declared || *by_id != *declared) {
            out.push_back({"vertex " + v.id, "av-id-format", "id does not match its source database"});
            continue;
        }
        auto desc = v.attributes.find(std::string(kAttrDescription));
        if (desc == v.attributes.end() || is_blank(desc->second)) {
            out.push_back({"vertex " + v.id, "av-description", "attack vector has no description"});
        }
        sources[v.id] = *by_id;
    }
    for (const auto& a : av.arrows) {
        auto s = sources.find(a.src);
        auto t = sources.find(a.tgt);
        if (s == sources.end() || t == sources.end()) continue;
        const bool same = s->second == t->second;
        auto scope = a.attributes.find(std::string(kAttrScope));
        const std::string expected(same ? kIntraRelationship : kInterRelationship);
        if (scope == a.attributes.end() || scope->second != expected) {
            out.push_back({"arrow " + a.id, "av-scope", "scope must be " + expected});
        }
        if (s->second == Source::CVE && t->second == Source::CVE) {
            out.push_back({"arrow " + a.id, "av-no-cve-link", "arrows between two CVE entries are not allowed"});
        }
        if (!same && concreteness_rank(s->second) > concreteness_rank(t->second)) {
            out.push_back({"arrow " + a.id, "av-direction", "cross-database arrow must point to the more abstract entry"});
        }
    }
    return out;
}

} // namespace missionscope::vuln
