#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lirpa/graph.hpp"
#include "lirpa/perturbation.hpp"

namespace lirpa {

/// A parsed graph document: the graph plus the perturbation specs it carries.
struct GraphDocument {
  Graph graph;
  SpecMap specs;
};

/// Parses the JSON graph format. Node order in the document defines ids.
/// Throws ParseError.
GraphDocument parse_document(std::string_view text);
GraphDocument load_document(const std::filesystem::path& path);

/// Graph part only; perturbations are still validated.
Graph parse_graph(std::string_view text);

/// Inverse of parse_document. Doubles are written with round-trip precision,
/// so parse(serialize(d)) reproduces d bit for bit.
std::string serialize_document(const Graph& g, const SpecMap& specs);

PerturbationSpec parse_perturbation(std::string_view json_object);
std::string serialize_perturbation(const PerturbationSpec& spec);

}  // namespace lirpa
