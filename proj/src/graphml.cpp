#include "missionscope/graphml.hpp"

#include "missionscope/error.hpp"
#include "missionscope/io.hpp"

#include <expat.h>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace missionscope::graph {

namespace {

constexpr std::string_view kKeyKind = "ma.kind";
constexpr std::string_view kKeyVertexKind = "ma.vkind";
constexpr std::string_view kKeyLabel = "ma.label";
constexpr std::string_view kKeyRelation = "ma.relation";
constexpr std::string_view kKeyNamespace = "ma.ns";
constexpr std::string_view kKeyDescPrefix = "ma.desc.";

struct KeyDecl {
    std::string name;
    std::string domain;  // graph | node | edge | all
    std::optional<std::string> default_value;
};

// Data collected for one node/edge/graph before it is turned into model types.
struct PendingElement {
    std::map<std::string, std::string> data;  // attr.name -> text
    long line = 0;
    long column = 0;
};

class GraphmlReader {
public:
    explicit GraphmlReader(GraphKind expected) : expected_(expected) {}

    LabeledGraph run(std::string_view document);

private:
    static void on_start(void* self, const XML_Char* name, const XML_Char** atts) {
        static_cast<GraphmlReader*>(self)->start(name, atts);
    }
    static void on_end(void* self, const XML_Char* name) { static_cast<GraphmlReader*>(self)->end(name); }
    static void on_text(void* self, const XML_Char* text, int len) {
        static_cast<GraphmlReader*>(self)->text(std::string_view(text, static_cast<std::size_t>(len)));
    }

    void start(std::string_view name, const XML_Char** atts);
    void end(std::string_view name);
    void text(std::string_view chunk);

    void fail(const std::string& message) {
        if (error_) return;
        error_ = message;
        error_line_ = static_cast<long>(XML_GetCurrentLineNumber(parser_));
        error_column_ = static_cast<long>(XML_GetCurrentColumnNumber(parser_)) + 1;
        XML_StopParser(parser_, XML_FALSE);
    }

    long line() const { return static_cast<long>(XML_GetCurrentLineNumber(parser_)); }
    long column() const { return static_cast<long>(XML_GetCurrentColumnNumber(parser_)) + 1; }

    std::string key_name(const std::string& key_id) const {
        auto it = keys_.find(key_id);
        return it == keys_.end() ? key_id : it->second.name;
    }

    void apply_defaults(PendingElement& element, std::string_view domain) const;
    void finish_vertex(PendingElement element, std::string id);
    void finish_arrow(PendingElement element, std::string id, std::string src, std::string tgt);

    // Returns false (after fail()) when a descriptor key is malformed.
    bool take_descriptors(std::map<std::string, std::string>& data, const OwnerRef& owner);

    GraphKind expected_;
    XML_Parser parser_ = nullptr;
    std::optional<std::string> error_;
    long error_line_ = 0;
    long error_column_ = 0;

    std::vector<std::string> stack_;
    std::map<std::string, KeyDecl> keys_;
    std::string current_key_;
    bool in_default_ = false;
    std::string default_text_;

    int graphs_seen_ = 0;
    bool in_graph_ = false;
    PendingElement graph_element_;

    std::optional<PendingElement> element_;
    std::string element_id_, element_src_, element_tgt_;
    bool element_is_edge_ = false;

    // <data> capture; nested markup is re-serialized into the text.
    bool in_data_ = false;
    int data_depth_ = 0;
    std::string data_key_;
    std::string data_text_;

    LabeledGraph graph_;
};

std::string escape_text(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (char c : in) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string escape_attribute(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (char c : in) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\t': out += "&#9;"; break;
        case '\n': out += "&#10;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

std::optional<std::string_view> attribute(const XML_Char** atts, std::string_view name) {
    for (int i = 0; atts[i]; i += 2) {
        if (name == atts[i]) return std::string_view(atts[i + 1]);
    }
    return std::nullopt;
}

void GraphmlReader::start(std::string_view name, const XML_Char** atts) {
    if (error_) return;
    if (in_data_) {
        ++data_depth_;
        data_text_ += '<';
        data_text_ += name;
        for (int i = 0; atts[i]; i += 2) {
            data_text_ += ' ';
            data_text_ += atts[i];
            data_text_ += "=\"" + escape_attribute(atts[i + 1]) + '"';
        }
        data_text_ += '>';
        stack_.emplace_back(name);
        return;
    }

    const std::string parent = stack_.empty() ? std::string() : stack_.back();
    stack_.emplace_back(name);

    if (parent.empty()) {
        if (name != "graphml") fail("root element must be <graphml>, found <" + std::string(name) + ">");
        return;
    }
    if (name == "key" && parent == "graphml") {
        auto id = attribute(atts, "id");
        if (!id || id->empty()) return fail("<key> without id");
        KeyDecl decl;
        auto attr_name = attribute(atts, "attr.name");
        decl.name = attr_name && !attr_name->empty() ? std::string(*attr_name) : std::string(*id);
        decl.domain = std::string(attribute(atts, "for").value_or("all"));
        current_key_ = std::string(*id);
        keys_[current_key_] = decl;
        return;
    }
    if (name == "default" && parent == "key") {
        in_default_ = true;
        default_text_.clear();
        return;
    }
    if (name == "graph") {
        if (parent != "graphml") return fail("nested graphs are not supported");
        if (++graphs_seen_ > 1) return fail("only one <graph> per document is supported");
        auto edgedefault = attribute(atts, "edgedefault");
        if (!edgedefault || *edgedefault != "directed") {
            return fail("graph must declare edgedefault=\"directed\"");
        }
        in_graph_ = true;
        graph_element_ = PendingElement{{}, line(), column()};
        return;
    }
    if (name == "node" || name == "edge") {
        if (parent != "graph") return fail("<" + std::string(name) + "> outside <graph>");
        element_ = PendingElement{{}, line(), column()};
        element_is_edge_ = name == "edge";
        element_id_ = std::string(attribute(atts, "id").value_or(""));
        if (element_id_.empty()) return fail("<" + std::string(name) + "> without id");
        if (element_is_edge_) {
            auto directed = attribute(atts, "directed");
            if (directed && *directed != "true") return fail("undirected edge '" + element_id_ + "'");
            element_src_ = std::string(attribute(atts, "source").value_or(""));
            element_tgt_ = std::string(attribute(atts, "target").value_or(""));
            if (element_src_.empty() || element_tgt_.empty()) {
                return fail("edge '" + element_id_ + "' lacks source or target");
            }
        }
        return;
    }
    if (name == "data") {
        if (parent != "graph" && parent != "node" && parent != "edge") return;
        auto key = attribute(atts, "key");
        if (!key) return fail("<data> without key");
        in_data_ = true;
        data_depth_ = 0;
        data_key_ = key_name(std::string(*key));
        data_text_.clear();
        return;
    }
    if (name == "hyperedge" || name == "port" || name == "endpoint") {
        return fail("<" + std::string(name) + "> is not supported");
    }
    // Anything else (<desc>, <locator>, foreign elements) carries no model data.
}

void GraphmlReader::end(std::string_view name) {
    if (error_) return;
    stack_.pop_back();
    if (in_data_) {
        if (data_depth_ > 0) {
            --data_depth_;
            data_text_ += "</" + std::string(name) + '>';
            return;
        }
        in_data_ = false;
        PendingElement& target = element_ ? *element_ : graph_element_;
        if (!target.data.emplace(data_key_, data_text_).second) {
            fail("data key '" + data_key_ + "' given twice on one element");
        }
        return;
    }
    if (name == "default" && in_default_) {
        in_default_ = false;
        keys_[current_key_].default_value = default_text_;
        return;
    }
    if (name == "node" || name == "edge") {
        if (!element_) return;
        PendingElement element = std::move(*element_);
        element_.reset();
        if (element_is_edge_) {
            finish_arrow(std::move(element), element_id_, element_src_, element_tgt_);
        } else {
            finish_vertex(std::move(element), element_id_);
        }
        return;
    }
    if (name == "graph") {
        in_graph_ = false;
    }
}

void GraphmlReader::text(std::string_view chunk) {
    if (error_) return;
    if (in_data_) {
        data_text_ += in_data_ && data_depth_ > 0 ? escape_text(chunk) : std::string(chunk);
    } else if (in_default_) {
        default_text_ += chunk;
    }
}

void GraphmlReader::apply_defaults(PendingElement& element, std::string_view domain) const {
    for (const auto& [id, decl] : keys_) {
        if (!decl.default_value) continue;
        if (decl.domain != domain && decl.domain != "all") continue;
        element.data.emplace(decl.name, *decl.default_value);
    }
}

bool GraphmlReader::take_descriptors(std::map<std::string, std::string>& data, const OwnerRef& owner) {
    std::optional<DescriptorSet> set;
    for (auto it = data.begin(); it != data.end();) {
        std::string_view name = it->first;
        if (name == kKeyNamespace) {
            if (!set) set = DescriptorSet{owner, {}, {}};
            set->ns = it->second;
            it = data.erase(it);
            continue;
        }
        if (name.starts_with(kKeyDescPrefix)) {
            std::string_view rest = name.substr(kKeyDescPrefix.size());
            auto dot = rest.find('.');
            auto category = parse_descriptor_category(rest.substr(0, dot));
            if (dot == std::string_view::npos || !category || dot + 1 == rest.size()) {
                fail("malformed descriptor key '" + std::string(name) + "'");
                return false;
            }
            if (!set) set = DescriptorSet{owner, {}, {}};
            set->entries.push_back({*category, std::string(rest.substr(dot + 1)), it->second});
            it = data.erase(it);
            continue;
        }
        ++it;
    }
    if (set) graph_.descriptors.push_back(std::move(*set));
    return true;
}

void GraphmlReader::finish_vertex(PendingElement element, std::string id) {
    apply_defaults(element, "node");
    Vertex v;
    v.id = std::move(id);
    auto kind_it = element.data.find(std::string(kKeyVertexKind));
    if (kind_it == element.data.end()) return fail("node '" + v.id + "' has no ma.vkind");
    auto kind = parse_vertex_kind(kind_it->second);
    if (!kind) return fail("node '" + v.id + "' has unknown vertex kind '" + kind_it->second + "'");
    v.kind = *kind;
    element.data.erase(kind_it);
    if (auto it = element.data.find(std::string(kKeyLabel)); it != element.data.end()) {
        v.label = it->second;
        element.data.erase(it);
    }
    if (!take_descriptors(element.data, {ElementType::Vertex, v.id})) return;
    for (auto& [k, val] : element.data) {
        if (std::string_view(k).starts_with(kReservedPrefix)) {
            return fail("reserved key '" + k + "' is not valid on a node");
        }
        v.attributes.emplace(k, std::move(val));
    }
    graph_.vertices.push_back(std::move(v));
}

void GraphmlReader::finish_arrow(PendingElement element, std::string id, std::string src,
                                 std::string tgt) {
    apply_defaults(element, "edge");
    Arrow a;
    a.id = std::move(id);
    a.src = std::move(src);
    a.tgt = std::move(tgt);
    if (auto it = element.data.find(std::string(kKeyRelation)); it != element.data.end()) {
        a.relation = it->second;
        element.data.erase(it);
    }
    if (!take_descriptors(element.data, {ElementType::Arrow, a.id})) return;
    for (auto& [k, val] : element.data) {
        if (std::string_view(k).starts_with(kReservedPrefix)) {
            return fail("reserved key '" + k + "' is not valid on an edge");
        }
        a.attributes.emplace(k, std::move(val));
    }
    graph_.arrows.push_back(std::move(a));
}

LabeledGraph GraphmlReader::run(std::string_view document) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw ParseError("cannot allocate XML parser", 0, 0);
    parser_ = parser.get();
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &GraphmlReader::on_start, &GraphmlReader::on_end);
    XML_SetCharacterDataHandler(parser_, &GraphmlReader::on_text);

    const auto status = XML_Parse(parser_, document.data(), static_cast<int>(document.size()), XML_TRUE);
    if (error_) throw ParseError(*error_, error_line_, error_column_);
    if (status != XML_STATUS_OK) {
        throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser_)),
                         static_cast<long>(XML_GetCurrentLineNumber(parser_)),
                         static_cast<long>(XML_GetCurrentColumnNumber(parser_)) + 1);
    }
    if (graphs_seen_ == 0) throw ParseError("document contains no <graph>", line(), column());

    apply_defaults(graph_element_, "graph");
    graph_.kind = expected_;
    for (auto& [k, val] : graph_element_.data) {
        if (k == kKeyKind) {
            auto declared = parse_graph_kind(val);
            if (!declared) throw KindError("unknown graph kind '" + val + "'");
            if (*declared != expected_) {
                throw KindError("document declares a " + val + " graph, expected " +
                                std::string(to_string(expected_)));
            }
        } else if (std::string_view(k).starts_with(kReservedPrefix)) {
            throw ParseError("reserved key '" + k + "' is not valid on a graph", graph_element_.line,
                             graph_element_.column);
        } else {
            graph_.attributes.emplace(k, val);
        }
    }

    auto violations = validate(graph_);
    if (!violations.empty()) {
        const Violation& first = violations.front();
        std::string message = first.element + ": " + first.message + " [" + first.invariant + "]";
        if (violations.size() > 1) {
            message += " (+" + std::to_string(violations.size() - 1) + " more)";
        }
        throw IntegrityError(message);
    }
    return std::move(graph_);
}

} // namespace

LabeledGraph parse_graphml(std::string_view document, GraphKind expected) {
    GraphmlReader reader(expected);
    return reader.run(document);
}

std::string write_graphml(const LabeledGraph& input) {
    const LabeledGraph g = canonical(input);

    // attr.name -> set of domains it is used in
    std::map<std::string, std::set<std::string>> keys;
    keys[std::string(kKeyKind)].insert("graph");
    keys[std::string(kKeyVertexKind)].insert("node");
    keys[std::string(kKeyLabel)].insert("node");
    keys[std::string(kKeyRelation)].insert("edge");
    keys[std::string(kKeyNamespace)].insert("node");
    keys[std::string(kKeyNamespace)].insert("edge");
    for (const auto& [k, _] : g.attributes) keys[k].insert("graph");
    for (const Vertex& v : g.vertices) {
        for (const auto& [k, _] : v.attributes) keys[k].insert("node");
    }
    for (const Arrow& a : g.arrows) {
        for (const auto& [k, _] : a.attributes) keys[k].insert("edge");
    }
    auto desc_key = [](const DescriptorEntry& e) {
        return std::string(kKeyDescPrefix) + std::string(to_string(e.category)) + "." + e.key;
    };
    for (const DescriptorSet& set : g.descriptors) {
        for (const DescriptorEntry& e : set.entries) {
            keys[desc_key(e)].insert(set.owner.type == ElementType::Vertex ? "node" : "edge");
        }
    }

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    for (const auto& [name, domains] : keys) {
        const std::string domain = domains.size() == 1 ? *domains.begin() : "all";
        out << "  <key id=\"" << escape_attribute(name) << "\" for=\"" << domain << "\" attr.name=\""
            << escape_attribute(name) << "\" attr.type=\"string\"/>\n";
    }
    out << "  <graph id=\"G\" edgedefault=\"directed\">\n";
    auto data = [&](std::string_view indent, std::string_view key, std::string_view value) {
        out << indent << "<data key=\"" << escape_attribute(key) << "\">" << escape_text(value)
            << "</data>\n";
    };
    data("    ", kKeyKind, to_string(g.kind));
    for (const auto& [k, v] : g.attributes) data("    ", k, v);

    auto write_descriptors = [&](const OwnerRef& owner) {
        const DescriptorSet* set = g.descriptors_of(owner);
        if (!set) return;
        data("      ", kKeyNamespace, set->ns);
        for (const DescriptorEntry& e : set->entries) data("      ", desc_key(e), e.value);
    };

    for (const Vertex& v : g.vertices) {
        out << "    <node id=\"" << escape_attribute(v.id) << "\">\n";
        data("      ", kKeyVertexKind, to_string(v.kind));
        data("      ", kKeyLabel, v.label);
        write_descriptors({ElementType::Vertex, v.id});
        for (const auto& [k, val] : v.attributes) data("      ", k, val);
        out << "    </node>\n";
    }
    for (const Arrow& a : g.arrows) {
        out << "    <edge id=\"" << escape_attribute(a.id) << "\" source=\"" << escape_attribute(a.src)
            << "\" target=\"" << escape_attribute(a.tgt) << "\">\n";
        data("      ", kKeyRelation, a.relation);
        write_descriptors({ElementType::Arrow, a.id});
        for (const auto& [k, val] : a.attributes) data("      ", k, val);
        out << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

LabeledGraph read_graphml_file(const std::filesystem::path& path, GraphKind expected) {
    return parse_graphml(io::read_file(path), expected);
}

void write_graphml_file(const std::filesystem::path& path, const LabeledGraph& g) {
    io::write_file(path, write_graphml(g));
}

} // namespace missionscope::graph
