#pragma once

#include "missionscope/graph.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace missionscope::graph {

// GraphML reader/writer for LabeledGraph.
//
// Reserved keys (matched on attr.name, falling back to the key id):
//   ma.kind                      graph   R | F | Sigma | S | AV
//   ma.vkind                     node    closed vertex-kind enumeration
//   ma.label                     node    display label
//   ma.relation                  edge    relation tag
//   ma.ns                        node/edge descriptor namespace
//   ma.desc.<category>.<key>     node/edge descriptor entry
// Every other key is kept verbatim in the element's attribute map. Edges must
// be directed. Nested graphs, hyperedges and ports are rejected.

// Throws ParseError (malformed XML / unsupported construct, with position),
// IntegrityError (violated invariant, naming the element) or KindError (the
// document declares a different graph kind than `expected`).
LabeledGraph parse_graphml(std::string_view document, GraphKind expected);

// Deterministic: keys sorted by name, vertices then arrows sorted by id.
std::string write_graphml(const LabeledGraph& g);

LabeledGraph read_graphml_file(const std::filesystem::path& path, GraphKind expected);
void write_graphml_file(const std::filesystem::path& path, const LabeledGraph& g);

} // namespace missionscope::graph
