#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lirpa/fusion.hpp"
#include "lirpa/graph_io.hpp"

namespace py = pybind11;
using namespace lirpa;

namespace {

BoundStrategy strategy(const std::string& name) {
  const auto s = strategy_from_name(name);
  if (!s) throw PreconditionError("unknown method '" + name + "'");
  return *s;
}

BoundOptions options(const std::string& relu) {
  BoundOptions o = loss_bound_defaults();
  if (relu == "adaptive") {
    o.relu_mode = ReluLowerMode::Adaptive;
  } else if (relu != "zero") {
    throw PreconditionError("relu must be 'zero' or 'adaptive'");
  }
  return o;
}

Assignment assignment(const Graph& g, const std::map<std::size_t, Vector>& values) {
  Assignment a(g.size());
  for (const auto& [id, v] : values) a.set(NodeId{id}, v);
  return a;
}

void set_eps(GraphDocument& doc, double eps, std::optional<double> p) {
  if (!(eps >= 0.0)) throw PreconditionError("eps must be >= 0");
  for (std::size_t i = 0; i < doc.specs.size(); ++i) {
    PerturbationSpec* s = doc.specs.find(NodeId{i});
    if (s == nullptr) continue;
    if (auto* ball = std::get_if<LpBallSpec>(s)) {
      ball->eps = eps;
      if (p) ball->p = *p;
    }
  }
}

}  // namespace

PYBIND11_MODULE(_lirpa, m) {
  m.doc() = "Linear relaxation bounds for computational graphs";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<GraphDocument>(m, "Document")
      .def_static("parse", [](const std::string& text) { return parse_document(text); })
      .def_static("load", [](const std::string& path) { return load_document(path); })
      .def("to_json", [](const GraphDocument& d) { return serialize_document(d.graph, d.specs); })
      .def_property_readonly("size", [](const GraphDocument& d) { return d.graph.size(); })
      .def_property_readonly("output", [](const GraphDocument& d) { return d.graph.output().value; })
      .def_property_readonly("output_dim", [](const GraphDocument& d) { return d.graph.node(d.graph.output()).dim; })
      .def("set_eps", &set_eps, py::arg("eps"), py::arg("p") = py::none(),
           "Override the radius (and optionally the norm) of every lp ball.")
      .def(
          "evaluate",
          [](const GraphDocument& d, const std::map<std::size_t, Vector>& inputs) {
            return Vector(evaluate(d.graph, assignment(d.graph, inputs)).at(d.graph.output()));
          },
          py::arg("inputs"))
      .def(
          "nominal",
          [](const GraphDocument& d) {
            Assignment a(d.graph.size());
            for (const Node& n : d.graph.nodes()) {
              if (n.is_independent()) a.set(n.id, nominal_value(d.specs.at(n.id)));
            }
            return Vector(evaluate(d.graph, a).at(d.graph.output()));
          },
          "Output at the center of every perturbation set.");

  m.def(
      "compute_bounds",
      [](const GraphDocument& d, const std::string& method, const std::string& relu,
         std::optional<std::size_t> node, std::optional<Matrix> out_coeff) {
        const NodeId target = node ? NodeId{*node} : d.graph.output();
        const BoundResult r = compute_bounds(d.graph, d.specs, strategy(method), target, options(relu), out_coeff);
        return std::make_pair(r.bounds.lower, r.bounds.upper);
      },
      py::arg("doc"), py::arg("method") = "backward", py::arg("relu") = "zero", py::arg("node") = py::none(),
      py::arg("out_coeff") = py::none(), "Returns (lower, upper) for out_coeff * h_node.");

  m.def(
      "margin_transform", [](std::size_t label, std::size_t k) { return margin_transform({label, k}); },
      py::arg("label"), py::arg("num_classes"));
  m.def("cross_entropy", &cross_entropy, py::arg("logits"), py::arg("label"));

  m.def(
      "bound_loss_fused",
      [](const GraphDocument& d, std::size_t label, const std::string& method, const std::string& relu) {
        return bound_loss_fused(d.graph, d.specs, {label, d.graph.node(d.graph.output()).dim}, strategy(method),
                                options(relu));
      },
      py::arg("doc"), py::arg("label"), py::arg("method") = "backward", py::arg("relu") = "zero");
  m.def(
      "bound_loss_unfused",
      [](const GraphDocument& d, std::size_t label, const std::string& method, const std::string& relu) {
        const UnfusedLoss u = bound_loss_unfused(d.graph, d.specs, {label, d.graph.node(d.graph.output()).dim},
                                                 strategy(method), options(relu));
        return std::make_pair(u.loss, u.margin_lowers);
      },
      py::arg("doc"), py::arg("label"), py::arg("method") = "backward", py::arg("relu") = "zero",
      "Returns (loss, margin_lowers).");
  m.def(
      "compare_loss_fusion",
      [](const GraphDocument& d, std::size_t label, const std::string& method, const std::string& relu) {
        const FusedLossReport r = compare_loss_fusion(d.graph, d.specs, {label, d.graph.node(d.graph.output()).dim},
                                                      strategy(method), options(relu));
        py::dict out;
        out["fused_upper"] = r.fused_upper;
        out["unfused_upper"] = r.unfused_upper;
        out["margin_lowers"] = r.margin_lowers;
        out["margin_uppers"] = r.margin_uppers;
        return out;
      },
      py::arg("doc"), py::arg("label"), py::arg("method") = "ibp", py::arg("relu") = "zero");
  m.def(
      "flatness",
      [](const GraphDocument& d, double eps_bar, const std::vector<std::pair<std::map<std::size_t, Vector>, std::size_t>>& batch,
         const std::string& method, const std::string& relu) {
        std::vector<FlatnessExample> examples;
        for (const auto& [inputs, label] : batch) examples.push_back({assignment(d.graph, inputs), label});
        return flatness_score(d.graph, eps_bar, examples, {}, strategy(method), options(relu));
      },
      py::arg("doc"), py::arg("eps_bar"), py::arg("batch"), py::arg("method") = "backward", py::arg("relu") = "zero",
      "batch is a list of ({input_id: values}, label) pairs.");
}
