#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lirpa/backward.hpp"
#include "lirpa/fusion.hpp"
#include "lirpa/graph_io.hpp"
#include "lirpa/report.hpp"
#include "lirpa/sampling.hpp"

namespace {

using namespace lirpa;
using json = nlohmann::ordered_json;

constexpr int kExitParse = 1;
constexpr int kExitDomain = 2;
constexpr int kExitUsage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string graph;
  std::string method = "backward";
  std::optional<double> eps;
  std::optional<std::string> p;
  std::string relu = "zero";
  std::optional<std::size_t> label;
  std::optional<std::string> output;
  bool all_nodes = false;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  bool table = false;
  bool shared = false;
  double eps_bar = 0.0;
  std::optional<std::string> batch;
};

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

BoundStrategy parse_method(const std::string& name) {
  if (auto s = strategy_from_name(name)) return *s;
  throw UsageError("unknown method '" + name + "'");
}

BoundOptions bound_options(const Options& o) {
  BoundOptions b;
  b.relu_mode = o.relu == "adaptive" ? ReluLowerMode::Adaptive : ReluLowerMode::Zero;
  return b;
}

double parse_p(const std::string& p) {
  if (p == "inf") return kInfinity;
  if (p == "1") return 1.0;
  if (p == "2") return 2.0;
  throw UsageError("--p must be 1, 2 or inf");
}

// --eps and --p override every lp ball in the document.
GraphDocument load(const Options& o) {
  GraphDocument doc = load_document(o.graph);
  for (const Node& n : doc.graph.nodes()) {
    auto* spec = doc.specs.find(n.id);
    auto* ball = spec ? std::get_if<LpBallSpec>(spec) : nullptr;
    if (ball == nullptr) continue;
    if (o.eps) {
      if (!(*o.eps >= 0.0)) throw UsageError("--eps must be >= 0");
      ball->eps = *o.eps;
    }
    if (o.p) ball->p = parse_p(*o.p);
  }
  return doc;
}

std::size_t require_label(const Options& o, const Graph& g) {
  const std::size_t k = g.node(g.output()).dim;
  if (k < 2) throw UsageError("output has dim " + std::to_string(k) + "; need at least 2 classes");
  if (!o.label) throw UsageError("--label is required");
  if (*o.label >= k) throw UsageError("--label out of range");
  return *o.label;
}

void emit(const Options& o, const std::string& text) {
  if (!o.output) {
    std::cout << text;
    return;
  }
  std::ofstream out(*o.output);
  if (!out) throw UsageError("cannot write " + *o.output);
  out << text;
}

BoundReport run_bounds(const GraphDocument& doc, BoundStrategy s, const Options& o) {
  const Stopwatch clock;
  BoundResult r = compute_bounds(doc.graph, doc.specs, s, doc.graph.output(), bound_options(o));
  BoundReport rep;
  rep.time_ms = clock.ms();
  rep.method = std::string(strategy_name(s));
  rep.output = r.bounds;
  if (o.all_nodes) {
    for (const Node& n : doc.graph.nodes()) {
      if (const auto* box = r.intermediates.find(n.id); box && n.id != doc.graph.output()) {
        rep.nodes.push_back({n.id, *box});
      }
    }
    rep.nodes.push_back({doc.graph.output(), r.bounds});
  }
  return rep;
}

int cmd_bounds(const Options& o) {
  const GraphDocument doc = load(o);
  emit(o, to_json(run_bounds(doc, parse_method(o.method), o)).dump(2) + "\n");
  return 0;
}

int cmd_verify(const Options& o) {
  const GraphDocument doc = load(o);
  const std::size_t label = require_label(o, doc.graph);
  const BoundStrategy s = parse_method(o.method);
  const MarginSpec spec{label, doc.graph.node(doc.graph.output()).dim};

  const Stopwatch clock;
  const BoundResult r =
      compute_bounds(doc.graph, doc.specs, s, doc.graph.output(), bound_options(o), margin_transform(spec));
  BoundReport rep;
  rep.time_ms = clock.ms();
  rep.method = std::string(strategy_name(s));
  rep.output = r.bounds;
  rep.verdict = is_certified(r.bounds.lower, label) ? "certified" : "unknown";
  rep.margin_lowers = r.bounds.lower;
  emit(o, to_json(rep).dump(2) + "\n");
  return 0;
}

std::string render_table(const std::vector<json>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %14s %14s %14s %10s\n", "method", "lower", "upper", "width", "time_ms");
  out << line;
  for (const json& r : rows) {
    const auto num = [](const json& v) { return v.is_number() ? v.get<double>() : std::nan(""); };
    std::snprintf(line, sizeof line, "%-18s %14.6g %14.6g %14.6g %10.3f\n", r["method"].get<std::string>().c_str(),
                  num(r["lower"][0]), num(r["upper"][0]), num(r["width"]), num(r["time_ms"]));
    out << line;
  }
  return out.str();
}

int cmd_compare(const Options& o) {
  const GraphDocument doc = load(o);
  struct Row {
    BoundReport report;
    double width;
  };
  std::vector<Row> rows;
  for (BoundStrategy s : {BoundStrategy::IBP, BoundStrategy::Forward, BoundStrategy::BackwardOnly,
                          BoundStrategy::IBPPlusBackward}) {
    BoundReport rep = run_bounds(doc, s, o);
    const double width = rep.output.width().sum();
    rows.push_back({std::move(rep), width});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.width < b.width; });

  std::vector<Assignment> points;
  std::mt19937_64 rng(o.seed);
  for (std::size_t k = 0; k < o.samples; ++k) points.push_back(sample_assignment(doc.graph, doc.specs, rng));

  std::vector<json> out;
  for (const Row& row : rows) {
    json j = to_json(row.report);
    j["width"] = json_number(row.width);
    if (o.samples > 0) {
      std::size_t violations = 0;
      for (const Assignment& a : points) {
        if (!row.report.output.contains(evaluate(doc.graph, a).at(doc.graph.output()), 1e-7)) ++violations;
      }
      j["violations"] = violations;
    }
    out.push_back(std::move(j));
  }
  emit(o, o.table ? render_table(out) : json(out).dump(2) + "\n");
  return 0;
}

int cmd_fuse(const Options& o) {
  const GraphDocument doc = load(o);
  const std::size_t label = require_label(o, doc.graph);
  const BoundStrategy s = parse_method(o.method);
  const MarginSpec spec{label, doc.graph.node(doc.graph.output()).dim};
  BoundOptions b = bound_options(o);

  const Stopwatch clock;
  json j;
  j["method"] = std::string(strategy_name(s));
  if (o.shared) {
    if (s != BoundStrategy::IBP && s != BoundStrategy::Forward) {
      throw UsageError("--shared takes --method ibp or forward");
    }
    const FusedLossReport r = compare_loss_fusion(doc.graph, doc.specs, spec, s, b);
    j["fused_upper"] = json_number(r.fused_upper);
    j["unfused_upper"] = json_number(r.unfused_upper);
    j["margin_lowers"] = json_vector(r.margin_lowers);
  } else {
    j["fused_upper"] = json_number(bound_loss_fused(doc.graph, doc.specs, spec, s, b));
    const UnfusedLoss u = bound_loss_unfused(doc.graph, doc.specs, spec, s, b);
    j["unfused_upper"] = json_number(u.loss);
    j["margin_lowers"] = json_vector(u.margin_lowers);
  }
  j["time_ms"] = json_number(clock.ms());
  emit(o, j.dump(2) + "\n");
  return 0;
}

std::vector<FlatnessExample> load_batch(const Options& o, const GraphDocument& doc) {
  if (!o.batch) {
    FlatnessExample ex;
    ex.inputs.resize(doc.graph.size());
    for (const Node& n : doc.graph.nodes()) {
      if (n.is_independent()) ex.inputs.set(n.id, nominal_value(doc.specs.at(n.id)));
    }
    ex.label = require_label(o, doc.graph);
    return {ex};
  }
  std::ifstream in(*o.batch);
  if (!in) throw UsageError("cannot read " + *o.batch);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::Syntax, std::string("batch: ") + e.what());
  }
  std::vector<FlatnessExample> batch;
  try {
    for (const json& e : j) {
      FlatnessExample ex;
      ex.inputs.resize(doc.graph.size());
      for (const auto& [key, values] : e.at("inputs").items()) {
        const NodeId id{std::stoul(key)};
        const auto v = values.get<std::vector<double>>();
        ex.inputs.set(id, Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
      ex.label = e.at("label").get<std::size_t>();
      batch.push_back(std::move(ex));
    }
  } catch (const std::exception& e) {
    throw ParseError(ParseErrorKind::Syntax, std::string("batch: ") + e.what());
  }
  return batch;
}

int cmd_flatness(const Options& o) {
  const GraphDocument doc = load(o);
  const std::vector<FlatnessExample> batch = load_batch(o, doc);
  const BoundStrategy s = parse_method(o.method);
  const std::size_t k = doc.graph.node(doc.graph.output()).dim;
  for (const auto& ex : batch) {
    if (ex.label >= k) throw UsageError("label out of range in batch");
  }

  const Stopwatch clock;
  const double f = flatness_score(doc.graph, o.eps_bar, batch, {}, s, bound_options(o));
  json j;
  j["method"] = std::string(strategy_name(s));
  j["eps_bar"] = json_number(o.eps_bar);
  j["examples"] = batch.size();
  j["flatness"] = json_number(f);
  j["time_ms"] = json_number(clock.ms());
  emit(o, j.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("graph", o.graph, "graph document (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--method", o.method, "ibp | forward | backward | ibp+backward | forward+backward")
      ->check(CLI::IsMember({"ibp", "forward", "backward", "ibp+backward", "forward+backward"}));
  cmd->add_option("--eps", o.eps, "override the radius of every lp ball");
  cmd->add_option("--p", o.p, "override the norm of every lp ball")->check(CLI::IsMember({"1", "2", "inf"}));
  cmd->add_option("--relu", o.relu, "ReLU lower slope: adaptive | zero")->check(CLI::IsMember({"adaptive", "zero"}));
  cmd->add_option("--output", o.output, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified bounds for computational graphs"};
  app.require_subcommand(1);
  Options o;

  auto* bounds = app.add_subcommand("bounds", "bound the output node");
  add_common(bounds, o);
  bounds->add_flag("--all-nodes", o.all_nodes, "include every box the method computed");

  auto* verify = app.add_subcommand("verify", "certify the predicted class against every other class");
  add_common(verify, o);
  verify->add_option("--label", o.label, "ground-truth class")->required();

  auto* compare = app.add_subcommand("compare", "run ibp, forward, backward and ibp+backward, tightest first");
  add_common(compare, o);
  compare->add_option("--samples", o.samples, "check each interval against this many sampled points");
  compare->add_option("--seed", o.seed, "sampling seed");
  compare->add_flag("--table", o.table, "print a text table instead of JSON");

  auto* fuse = app.add_subcommand("fuse", "bound the cross-entropy loss with and without loss fusion");
  add_common(fuse, o);
  fuse->add_option("--label", o.label, "ground-truth class")->required();
  fuse->add_flag("--shared", o.shared, "give both losses the same network boxes");

  auto* flat = app.add_subcommand("flatness", "certified loss gap under weight perturbation");
  add_common(flat, o);
  flat->add_option("--eps-bar", o.eps_bar, "relative l2 radius of every weight matrix")->required();
  flat->add_option("--label", o.label, "class of the nominal input (without --batch)");
  flat->add_option("--batch", o.batch, "JSON list of {\"inputs\": {id: [..]}, \"label\": y}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*bounds) return cmd_bounds(o);
    if (*verify) return cmd_verify(o);
    if (*compare) return cmd_compare(o);
    if (*fuse) return cmd_fuse(o);
    return cmd_flatness(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
