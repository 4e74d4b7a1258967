#include "missionscope/evidence.hpp"

#include "missionscope/error.hpp"
#include "missionscope/io.hpp"
#include "missionscope/vuln.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <deque>
#include <unordered_set>

namespace missionscope::evidence {

namespace {

using nlohmann::json;

const std::unordered_set<std::string> kStopWords = {
    "an",   "and",  "are",  "as",    "at",   "be",   "by",    "can",  "could", "do",   "for",
    "from", "has",  "have", "if",    "in",   "into", "is",    "it",   "its",   "may",  "not",
    "of",   "on",   "or",   "other", "such", "than", "that",  "the",  "their", "then", "there",
    "these", "this", "to",  "via",   "was",  "when", "where", "which", "while", "who",  "with",
};

bool token_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

template <typename T>
T number_field(const json& doc, const char* name, T fallback) {
    auto it = doc.find(name);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw ConfigError(std::string("'") + name + "' must be a number");
    if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(std::string("'") + name + "' must be an integer");
        if (it->get<long long>() <= 0) throw ConfigError(std::string("'") + name + "' must be positive");
    }
    return it->get<T>();
}

std::string required_string(const json& record, const char* field, std::size_t line_no) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw FormatError("ledger line " + std::to_string(line_no) + ": missing string field '" + field + "'");
    }
    return it->get<std::string>();
}

} // namespace

double MatchConfig::weight(graph::DescriptorCategory category) const {
    auto it = token_weights.find(category);
    return it == token_weights.end() ? 1.0 : it->second;
}

void check_config(const MatchConfig& cfg) {
    if (!(cfg.min_score >= 0.0 && cfg.min_score <= 1.0)) throw ConfigError("min_score must lie in [0, 1]");
    if (cfg.max_candidates == 0) throw ConfigError("max_candidates must be positive");
    for (const auto& [category, w] : cfg.token_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("token weight for '" + std::string(graph::to_string(category)) +
                              "' must be a non-negative number");
        }
    }
}

MatchConfig parse_match_config(std::string_view document) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError("match config is not a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "min_score" && key != "max_candidates" && key != "token_weights" && key != "expand_abstractions") {
            throw ConfigError("unknown match config field '" + key + "'");
        }
    }
    MatchConfig cfg;
    cfg.min_score = number_field(doc, "min_score", cfg.min_score);
    cfg.max_candidates = number_field(doc, "max_candidates", cfg.max_candidates);
    if (auto it = doc.find("expand_abstractions"); it != doc.end()) {
        if (!it->is_boolean()) throw ConfigError("'expand_abstractions' must be a boolean");
        cfg.expand_abstractions = it->get<bool>();
    }
    if (auto it = doc.find("token_weights"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("'token_weights' must be an object");
        for (const auto& [name, value] : it->items()) {
            auto category = graph::parse_descriptor_category(name);
            if (!category) throw ConfigError("unknown descriptor category '" + name + "' in token_weights");
            if (!value.is_number()) throw ConfigError("token weight for '" + name + "' must be a number");
            cfg.token_weights[*category] = value.get<double>();
        }
    }
    check_config(cfg);
    return cfg;
}

std::string write_match_config(const MatchConfig& cfg) {
    json doc;
    doc["min_score"] = cfg.min_score;
    doc["max_candidates"] = cfg.max_candidates;
    doc["expand_abstractions"] = cfg.expand_abstractions;
    json weights = json::object();
    for (const auto& [category, w] : cfg.token_weights) weights[std::string(graph::to_string(category))] = w;
    doc["token_weights"] = weights;
    return doc.dump(2) + "\n";
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (current.size() > 1 && !kStopWords.count(current)) out.push_back(current);
        current.clear();
    };
    for (unsigned char c : text) {
        if (token_char(c)) {
            current += c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
        } else {
            flush();
        }
    }
    flush();
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

AvIndex::AvIndex(const graph::LabeledGraph& av) : av_(&av) {
    const graph::GraphIndex index(av);
    tokens_.resize(av.vertices.size());
    up_.resize(av.vertices.size());
    for (std::size_t i = 0; i < av.vertices.size(); ++i) {
        const auto entry = vuln::entry_from_vertex(av.vertices[i]);
        tokens_[i] = tokenize(entry.title + " " + entry.description);
    }
    for (const auto& a : av.arrows) {
        auto scope = a.attributes.find(std::string(vuln::kAttrScope));
        if (scope == a.attributes.end() || scope->second != vuln::kInterRelationship) continue;
        auto s = index.vertex_pos(a.src);
        auto t = index.vertex_pos(a.tgt);
        if (s && t) up_[*s].push_back(*t);
    }
    for (auto& targets : up_) {
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    }
}

std::vector<Candidate> evidence(const graph::DescriptorSet& descriptors, const AvIndex& av, const MatchConfig& cfg) {
    check_config(cfg);
    std::map<std::string, double> weighted;  // descriptor token -> weight
    for (const auto& entry : descriptors.entries) {
        const double w = cfg.weight(entry.category);
        for (auto& token : tokenize(entry.value)) {
            auto [it, fresh] = weighted.emplace(std::move(token), w);
            if (!fresh) it->second = std::max(it->second, w);
        }
    }
    if (weighted.empty()) return {};
    double descriptor_mass = 0.0;
    for (const auto& [token, w] : weighted) descriptor_mass += w;

    const auto& vertices = av.graph().vertices;
    std::vector<double> score(vertices.size(), 0.0);
    std::vector<bool> direct(vertices.size(), false);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        double shared = 0.0;
        double entry_only = 0.0;
        for (const auto& token : av.tokens(i)) {
            auto it = weighted.find(token);
            if (it == weighted.end()) {
                entry_only += 1.0;
            } else {
                shared += it->second;
            }
        }
        const double total = descriptor_mass + entry_only;
        if (shared > 0.0 && total > 0.0) {
            score[i] = shared / total;
            direct[i] = true;
        }
    }

    std::vector<std::string> via(vertices.size());
    if (cfg.expand_abstractions) {
        // Breadth-first from every textually matched CVE, strongest first so
        // `via` records the best-scoring origin.
        std::vector<std::size_t> cves;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (direct[i] && vuln::source_of_id(vertices[i].id) == vuln::Source::CVE) cves.push_back(i);
        }
        std::sort(cves.begin(), cves.end(), [&](std::size_t a, std::size_t b) {
            return score[a] != score[b] ? score[a] > score[b] : vertices[a].id < vertices[b].id;
        });
        for (std::size_t origin : cves) {
            std::vector<bool> seen(vertices.size(), false);
            std::deque<std::size_t> queue{origin};
            seen[origin] = true;
            while (!queue.empty()) {
                const std::size_t v = queue.front();
                queue.pop_front();
                for (std::size_t w : av.abstractions(v)) {
                    if (seen[w]) continue;
                    seen[w] = true;
                    queue.push_back(w);
                    if (!direct[w] && score[origin] > score[w]) {
                        score[w] = score[origin];
                        via[w] = vertices[origin].id;
                    }
                }
            }
        }
    }

    std::vector<Candidate> out;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (score[i] > 0.0 && score[i] >= cfg.min_score) out.push_back({vertices[i].id, score[i], via[i]});
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.attack_id < b.attack_id;
    });
    if (out.size() > cfg.max_candidates) out.resize(cfg.max_candidates);
    return out;
}

std::vector<Candidate> evidence(const graph::DescriptorSet& descriptors, const graph::LabeledGraph& av,
                                const MatchConfig& cfg) {
    return evidence(descriptors, AvIndex(av), cfg);
}

CandidateIndex match_components(const graph::LabeledGraph& s, const graph::LabeledGraph& av, const MatchConfig& cfg) {
    const AvIndex index(av);
    CandidateIndex out;
    for (const auto& set : s.descriptors) {
        out[set.owner.id] = ComponentCandidates{set.owner.id, set.ns, evidence(set, index, cfg)};
    }
    return out;
}

std::string_view to_string(Decision decision) {
    return decision == Decision::Relevant ? "relevant" : "irrelevant";
}

std::string_view to_string(Status status) {
    switch (status) {
    case Status::Candidate: return "candidate";
    case Status::Relevant: return "relevant";
    case Status::Irrelevant: return "irrelevant";
    }
    return "?";
}

Decision parse_decision(std::string_view text) {
    if (text == "relevant") return Decision::Relevant;
    if (text == "irrelevant") return Decision::Irrelevant;
    throw DomainError("decision must be 'relevant' or 'irrelevant', got '" + std::string(text) + "'");
}

TriageLedger TriageLedger::parse(std::string_view document) {
    TriageLedger ledger;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < document.size()) {
        const std::size_t end = std::min(document.find('\n', pos), document.size());
        const std::string_view line = document.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw FormatError("ledger line " + std::to_string(line_no) + " is not a JSON object");
        }
        TriageEntry e;
        e.timestamp = required_string(record, "timestamp", line_no);
        e.analyst = required_string(record, "analyst", line_no);
        e.component = required_string(record, "component", line_no);
        e.attack_id = required_string(record, "attack_id", line_no);
        e.rationale = required_string(record, "rationale", line_no);
        const std::string decision = required_string(record, "decision", line_no);
        try {
            e.decision = parse_decision(decision);
        } catch (const DomainError& err) {
            throw FormatError("ledger line " + std::to_string(line_no) + ": " + err.what());
        }
        ledger.append(std::move(e));
    }
    return ledger;
}

TriageLedger TriageLedger::open(const std::filesystem::path& path) {
    TriageLedger ledger;
    if (std::filesystem::exists(path)) ledger = parse(io::read_file(path));
    ledger.path_ = path;
    return ledger;
}

std::string TriageLedger::serialize(const TriageEntry& entry) {
    json record = {
        {"timestamp", entry.timestamp}, {"analyst", entry.analyst},
        {"component", entry.component}, {"attack_id", entry.attack_id},
        {"decision", to_string(entry.decision)}, {"rationale", entry.rationale},
    };
    return record.dump();
}

void TriageLedger::append(TriageEntry entry) {
    if (path_) io::append_line_durable(*path_, serialize(entry));
    latest_[{entry.component, entry.attack_id}] = entry.decision;
    entries_.push_back(std::move(entry));
}

Status TriageLedger::status(std::string_view component, std::string_view attack_id) const {
    auto it = latest_.find({std::string(component), std::string(attack_id)});
    if (it == latest_.end()) return Status::Candidate;
    return it->second == Decision::Relevant ? Status::Relevant : Status::Irrelevant;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

TriageEntry record_triage(TriageLedger& ledger, const CandidateIndex& candidates, std::string_view component,
                          std::string_view attack_id, std::string_view decision, std::string_view analyst,
                          std::string_view rationale, std::string timestamp) {
    const Decision d = parse_decision(decision);
    auto it = candidates.find(std::string(component));
    const bool known = it != candidates.end() &&
                       std::any_of(it->second.candidates.begin(), it->second.candidates.end(),
                                   [&](const Candidate& c) { return c.attack_id == attack_id; });
    if (!known) {
        throw TriageError("'" + std::string(attack_id) + "' is not a candidate for '" + std::string(component) + "'");
    }
    TriageEntry entry{timestamp.empty() ? utc_timestamp() : std::move(timestamp), std::string(analyst),
                      std::string(component), std::string(attack_id), d, std::string(rationale)};
    ledger.append(entry);
    return entry;
}

std::vector<Combination> enumerate_combinations(const std::set<std::string>& base, std::size_t k) {
    std::vector<Combination> out{{}};
    if (k == 0) return out;
    for (const auto& id : base) out.push_back({id});

    std::vector<std::string> cves;
    for (const auto& id : base) {
        if (vuln::source_of_id(id) == vuln::Source::CVE) cves.push_back(id);
    }
    const std::size_t n = cves.size();
    for (std::size_t size = 2; size <= std::min(k, n); ++size) {
        // Lexicographic index combinations over the sorted CVE list.
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        while (true) {
            Combination c;
            for (std::size_t i : pick) c.push_back(cves[i]);
            out.push_back(std::move(c));
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return out;
}

RelevantEvidence rel_evidence(std::string_view component, const graph::LabeledGraph& s,
                              const CandidateIndex& candidates, const TriageLedger& ledger, std::size_t k) {
    RelevantEvidence out;
    out.component = std::string(component);
    auto owner = s.resolve_owner(component);
    const graph::DescriptorSet* set = owner ? s.descriptors_of(*owner) : nullptr;
    auto it = candidates.find(out.component);
    if (!set || set->entries.empty() || it == candidates.end()) {
        out.warnings.push_back("'" + out.component + "' carries no descriptors in S; evidence is empty");
        out.combinations = {{}};
        return out;
    }

    std::set<std::string> matched;
    for (const auto& c : it->second.candidates) matched.insert(c.attack_id);
    std::set<std::string> base;
    std::set<std::string> ignored;
    for (const auto& e : ledger.entries()) {
        if (e.component != component) continue;
        if (!matched.count(e.attack_id)) {
            ignored.insert(e.attack_id);
            continue;
        }
        if (ledger.status(component, e.attack_id) == Status::Relevant) base.insert(e.attack_id);
    }
    for (const auto& id : ignored) {
        out.warnings.push_back("ledger decision for '" + id + "' on '" + out.component +
                               "' ignored: not a current candidate");
    }
    out.base.assign(base.begin(), base.end());
    out.combinations = enumerate_combinations(base, k);
    return out;
}

std::map<std::string, RelevantEvidence> relevant_evidence(const graph::LabeledGraph& s,
                                                          const CandidateIndex& candidates,
                                                          const TriageLedger& ledger, std::size_t k) {
    std::map<std::string, RelevantEvidence> out;
    for (const auto& set : s.descriptors) {
        out.emplace(set.owner.id, rel_evidence(set.owner.id, s, candidates, ledger, k));
    }
    return out;
}

RelevanceMap relevance_map(const std::map<std::string, RelevantEvidence>& relevant) {
    RelevanceMap out;
    for (const auto& [component, e] : relevant) {
        if (!e.base.empty()) out.emplace(component, e.base);
    }
    return out;
}

} // namespace missionscope::evidence
