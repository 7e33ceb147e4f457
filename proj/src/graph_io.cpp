#include "lirpa/graph_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lirpa {

namespace {

using json = nlohmann::ordered_json;
using K = ParseErrorKind;

[[noreturn]] void fail(K kind, const std::string& msg) { throw ParseError(kind, msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(K::Syntax, where + ": missing \"" + key + "\"");
  return *it;
}

double to_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(K::Syntax, where + ": expected a number");
  return v.get<double>();
}

Vector to_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(K::Syntax, where + ": expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = to_double(v[i], where);
  return out;
}

Matrix to_matrix(const json& v, const std::string& where) {
  if (!v.is_array()) fail(K::Syntax, where + ": expected a row-major array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(v[0].is_array() ? v[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = to_vector(v[static_cast<std::size_t>(r)], where);
    if (row.size() != cols) fail(K::DimensionMismatch, where + ": ragged weight matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

std::size_t to_index(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(K::Syntax, where + ": expected an integer");
  const auto i = v.get<long long>();
  if (i < 0) fail(K::InputOutOfRange, where + ": negative id");
  return static_cast<std::size_t>(i);
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

PerturbationSpec spec_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(K::Syntax, where + ": expected an object");
  const std::string type = require(j, "type", where).get<std::string>();
  if (type == "constant") {
    return ConstantSpec{to_vector(require(j, "value", where), where)};
  }
  if (type == "lp") {
    LpBallSpec b;
    b.center = to_vector(require(j, "center", where), where);
    b.eps = to_double(require(j, "eps", where), where);
    const json& p = require(j, "p", where);
    if (p.is_string()) {
      if (p.get<std::string>() != "inf") fail(K::Perturbation, where + ": p must be a number or \"inf\"");
      b.p = kInfinity;
    } else {
      b.p = to_double(p, where);
    }
    if (!(b.p >= 1.0)) fail(K::Perturbation, where + ": p must be >= 1");
    if (!(b.eps >= 0.0)) fail(K::Perturbation, where + ": eps must be >= 0");
    return b;
  }
  if (type == "synonym") {
    SynonymSpec s;
    const json& delta = require(j, "delta", where);
    if (!delta.is_number_integer() || delta.get<long long>() < 0) {
      fail(K::Perturbation, where + ": delta must be a non-negative integer");
    }
    s.budget = delta.get<int>();
    for (const auto& w : require(j, "words", where)) s.words.push_back(w.get<std::string>());
    s.substitutions.assign(s.words.size(), {});
    if (auto it = j.find("substitutions"); it != j.end()) {
      for (const auto& [pos, list] : it->items()) {
        std::size_t idx = 0;
        try {
          idx = std::stoul(pos);
        } catch (const std::exception&) {
          fail(K::Syntax, where + ": substitution key '" + pos + "' is not a position");
        }
        if (idx >= s.words.size()) fail(K::Perturbation, where + ": substitution position out of range");
        for (const auto& w : list) s.substitutions[idx].push_back(w.get<std::string>());
      }
    }
    for (const auto& [word, vec] : require(j, "embeddings", where).items()) {
      s.embeddings.emplace(word, to_vector(vec, where));
    }
    try {
      s.validate();
    } catch (const PreconditionError& e) {
      fail(K::Perturbation, where + ": " + e.what());
    }
    return s;
  }
  fail(K::Perturbation, where + ": unknown perturbation type '" + type + "'");
}

json spec_to_json(const PerturbationSpec& spec) {
  json j;
  if (const auto* c = std::get_if<ConstantSpec>(&spec)) {
    j["type"] = "constant";
    j["value"] = vector_json(c->value);
  } else if (const auto* b = std::get_if<LpBallSpec>(&spec)) {
    j["type"] = "lp";
    j["center"] = vector_json(b->center);
    j["eps"] = b->eps;
    if (std::isinf(b->p)) {
      j["p"] = "inf";
    } else {
      j["p"] = b->p;
    }
  } else {
    const auto& s = std::get<SynonymSpec>(spec);
    j["type"] = "synonym";
    j["delta"] = s.budget;
    j["words"] = s.words;
    json subs = json::object();
    for (std::size_t t = 0; t < s.substitutions.size(); ++t) {
      if (!s.substitutions[t].empty()) subs[std::to_string(t)] = s.substitutions[t];
    }
    j["substitutions"] = subs;
    json emb = json::object();
    for (const auto& [word, vec] : s.embeddings) emb[word] = vector_json(vec);
    j["embeddings"] = emb;
  }
  return j;
}

GraphDocument document_from_json(const json& doc) {
  if (!doc.is_object()) fail(K::Syntax, "graph document must be a JSON object");
  const json& nodes = require(doc, "nodes", "document");
  if (!nodes.is_array()) fail(K::Syntax, "\"nodes\" must be an array");

  GraphBuilder builder;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json& nj = nodes[i];
    const std::string where = "node " + std::to_string(i);
    if (!nj.is_object()) fail(K::Syntax, where + ": expected an object");
    const json& opj = require(nj, "op", where);
    if (!opj.is_string()) fail(K::Syntax, where + ": \"op\" must be a string");
    const auto op = op_from_name(opj.get<std::string>());
    if (!op) fail(K::UnknownOp, where + ": unknown op '" + opj.get<std::string>() + "'");

    std::vector<NodeId> inputs;
    if (auto it = nj.find("inputs"); it != nj.end()) {
      if (!it->is_array()) fail(K::Syntax, where + ": \"inputs\" must be an array");
      for (const auto& in : *it) inputs.push_back(NodeId{to_index(in, where)});
    }
    const std::size_t dim = to_index(require(nj, "dim", where), where);

    if (*op == OpKind::Affine) {
      if (inputs.size() != 1) fail(K::DimensionMismatch, where + ": affine takes exactly one input");
      Matrix w = to_matrix(require(nj, "weight", where), where);
      Vector b = Vector::Zero(w.rows());
      if (auto it = nj.find("bias"); it != nj.end()) b = to_vector(*it, where);
      if (static_cast<std::size_t>(w.rows()) != dim) {
        fail(K::DimensionMismatch, where + ": weight has " + std::to_string(w.rows()) + " rows but dim is " +
                                       std::to_string(dim));
      }
      builder.add_affine(inputs[0], std::move(w), std::move(b));
    } else if (*op == OpKind::Input) {
      if (!inputs.empty()) fail(K::DimensionMismatch, where + ": input nodes take no inputs");
      builder.add_input(dim);
    } else {
      builder.add_op(*op, std::move(inputs), dim);
    }
  }

  const json* out = doc.contains("output") ? &doc.at("output") : nullptr;
  if (out == nullptr || !out->is_number_integer()) {
    fail(K::Output, "document must name exactly one integer \"output\" node");
  }
  builder.set_output(NodeId{to_index(*out, "output")});

  SpecMap specs(nodes.size());
  if (auto it = doc.find("perturbations"); it != doc.end()) {
    if (!it->is_array()) fail(K::Syntax, "\"perturbations\" must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const json& pj = (*it)[k];
      const std::string where = "perturbation " + std::to_string(k);
      const NodeId id{to_index(require(pj, "node", where), where)};
      if (id.value >= nodes.size()) fail(K::InputOutOfRange, where + ": node id out of range");
      if (specs.contains(id)) fail(K::Perturbation, where + ": duplicate spec for node " + std::to_string(id.value));
      PerturbationSpec spec = spec_from_json(pj, where);
      if (is_perturbed(spec)) builder.mark_perturbed(id);
      specs.set(id, std::move(spec));
    }
  }

  Graph g = builder.build();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const NodeId id{i};
    const PerturbationSpec* spec = specs.find(id);
    if (spec == nullptr) continue;
    const Node& n = g.node(id);
    if (!n.is_independent()) {
      fail(K::Perturbation, "perturbation attached to dependent node " + std::to_string(i));
    }
    if (spec_dim(*spec) != n.dim) {
      fail(K::DimensionMismatch, "perturbation for node " + std::to_string(i) + " has dimension " +
                                     std::to_string(spec_dim(*spec)) + ", node has " + std::to_string(n.dim));
    }
  }
  return GraphDocument{std::move(g), std::move(specs)};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(K::Syntax, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

GraphDocument parse_document(std::string_view text) {
  const json doc = parse_json(text);
  try {
    return document_from_json(doc);
  } catch (const json::exception& e) {
    fail(K::Syntax, std::string("malformed graph document: ") + e.what());
  }
}

GraphDocument load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(K::Syntax, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

Graph parse_graph(std::string_view text) { return parse_document(text).graph; }

std::string serialize_document(const Graph& g, const SpecMap& specs) {
  json doc;
  json nodes = json::array();
  for (const Node& n : g.nodes()) {
    json nj;
    nj["op"] = std::string(op_name(n.op));
    json ins = json::array();
    for (NodeId in : n.inputs) ins.push_back(in.value);
    nj["inputs"] = ins;
    nj["dim"] = n.dim;
    if (n.op == OpKind::Affine) {
      nj["weight"] = matrix_json(n.params().weight);
      nj["bias"] = vector_json(n.params().bias);
    }
    nodes.push_back(std::move(nj));
  }
  doc["nodes"] = std::move(nodes);
  doc["output"] = g.output().value;
  json perts = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const PerturbationSpec* spec = specs.find(NodeId{i});
    if (spec == nullptr) continue;
    json pj;
    pj["node"] = i;
    const json body = spec_to_json(*spec);
    for (const auto& [k, v] : body.items()) pj[k] = v;
    perts.push_back(std::move(pj));
  }
  doc["perturbations"] = std::move(perts);
  return doc.dump(2);
}

PerturbationSpec parse_perturbation(std::string_view json_object) {
  const json j = parse_json(json_object);
  try {
    return spec_from_json(j, "perturbation");
  } catch (const json::exception& e) {
    fail(K::Syntax, std::string("malformed perturbation: ") + e.what());
  }
}

std::string serialize_perturbation(const PerturbationSpec& spec) { return spec_to_json(spec).dump(); }

}  // namespace lirpa
