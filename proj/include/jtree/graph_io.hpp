// Graph file format:
//
//   { "vertices": 2, "b": [1.0, -1.0],
//     "edges": [ {"u": 0, "v": 1, "a": 1.0}, {"u": 0, "v": 1, "a": 1.0} ] }
//
// u == v is a self-loop. Edges become half-edge pairs in file order.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "jtree/graph.hpp"

namespace jtree {

/// Parses and validates a graph document. Errors name the offending field
/// (or line/column for syntax errors) and are thrown as ValidationError.
JacobiGraph parse_graph_json(std::string_view text);
JacobiGraph read_graph_file(const std::filesystem::path& path);

nlohmann::json graph_to_json(const JacobiGraph& jg);

}  // namespace jtree
