#include "fixtures.hpp"

#include <algorithm>

#include "lirpa/interval.hpp"

namespace lirpa::testing {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

Instance worked_example(double eps) {
  GraphBuilder b;
  const NodeId x = b.add_input(2);
  const NodeId h1 = b.add_affine(x, mat({{2, 1}, {-3, 4}}), Vector::Zero(2));
  const NodeId r1 = b.add_op(OpKind::ReLU, {h1}, 2);
  const NodeId h2 = b.add_affine(r1, mat({{4, -2}, {2, 1}}), Vector::Zero(2));
  const NodeId r2 = b.add_op(OpKind::ReLU, {h2}, 2);
  const NodeId out = b.add_affine(r2, mat({{-2, 1}}), Vector::Zero(1));
  b.set_output(out);
  b.mark_perturbed(x);
  Instance inst{b.build(), SpecMap(6)};
  inst.specs.set(x, LpBallSpec{vec({0, 1}), eps, kInfinity});
  return inst;
}

namespace {

struct Draw {
  std::mt19937_64& rng;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  Matrix matrix(Eigen::Index r, Eigen::Index c, double scale) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(-scale, scale);
    return m;
  }
  Vector vector(Eigen::Index n, double scale) { return matrix(n, 1, scale); }
  double norm_p() {
    const double ps[] = {1.0, 2.0, kInfinity};
    return ps[index(3)];
  }
};

}  // namespace

SynonymSpec random_synonym(std::mt19937_64& rng, std::size_t n, std::size_t max_subs, int budget,
                           std::size_t emb_dim) {
  Draw d{rng};
  SynonymSpec s;
  s.budget = budget;
  std::size_t next = 0;
  const auto fresh = [&] {
    std::string w = "w" + std::to_string(next++);
    s.embeddings[w] = d.vector(static_cast<Eigen::Index>(emb_dim), 1.0);
    return w;
  };
  for (std::size_t t = 0; t < n; ++t) {
    s.words.push_back(fresh());
    std::vector<std::string> subs;
    const std::size_t k = d.index(max_subs + 1);
    for (std::size_t i = 0; i < k; ++i) subs.push_back(fresh());
    s.substitutions.push_back(std::move(subs));
  }
  return s;
}

namespace {

Instance random_graph_once(std::mt19937_64& rng, const RandomGraphOptions& options) {
  Draw d{rng};
  GraphBuilder b;
  std::vector<std::size_t> dims;
  std::vector<OpKind> ops;
  std::vector<int> exp_depth;
  SpecMap specs;

  const auto add = [&](NodeId id, std::size_t dim, OpKind op, int depth) {
    dims.push_back(dim);
    ops.push_back(op);
    exp_depth.push_back(depth);
    return id;
  };
  const auto random_dim = [&] { return 1 + d.index(options.max_dim); };

  {
    const std::size_t dim = random_dim();
    const NodeId x = add(b.add_input(dim), dim, OpKind::Input, 0);
    b.mark_perturbed(x);
    specs.set(x, LpBallSpec{d.vector(static_cast<Eigen::Index>(dim), 1.0), d.uniform(0.0, options.max_eps),
                            d.norm_p()});
  }
  if (d.chance(options.synonym_probability)) {
    SynonymSpec s = random_synonym(rng, 1 + d.index(2), 2, static_cast<int>(d.index(3)), 1 + d.index(2));
    const std::size_t dim = s.length() * s.embedding_dim();
    const NodeId x = add(b.add_input(dim), dim, OpKind::Input, 0);
    b.mark_perturbed(x);
    specs.set(x, std::move(s));
  }
  if (d.chance(options.constant_probability)) {
    const std::size_t dim = random_dim();
    const NodeId x = add(b.add_input(dim), dim, OpKind::Input, 0);
    specs.set(x, ConstantSpec{d.vector(static_cast<Eigen::Index>(dim), 1.0)});
  }

  const std::size_t target = std::max<std::size_t>(dims.size() + 2, 3 + d.index(options.max_nodes - 2));
  // Later nodes are picked more often so graphs grow deep rather than wide.
  const auto pick = [&] {
    const std::size_t n = dims.size();
    const std::size_t a = d.index(n);
    const std::size_t c = d.index(n);
    return std::max(a, c);
  };
  const OpKind kinds[] = {OpKind::Affine, OpKind::ReLU, OpKind::Exp, OpKind::Log,
                          OpKind::Neg,    OpKind::Add,  OpKind::Sub, OpKind::MulElementwise,
                          OpKind::SumReduce};

  while (dims.size() < target) {
    const OpKind op = kinds[d.index(std::size(kinds))];
    const std::size_t a = pick();
    const NodeId ia{a};
    switch (op) {
      case OpKind::Affine: {
        const std::size_t out = random_dim();
        const auto rows = static_cast<Eigen::Index>(out);
        const auto cols = static_cast<Eigen::Index>(dims[a]);
        add(b.add_affine(ia, d.matrix(rows, cols, 1.5 / static_cast<double>(cols)), d.vector(rows, 0.5)), out, op,
            exp_depth[a]);
        break;
      }
      case OpKind::Exp:
        if (exp_depth[a] > 0) continue;
        add(b.add_op(op, {ia}, dims[a]), dims[a], op, 1);
        break;
      case OpKind::Log: {
        std::vector<std::size_t> exps;
        for (std::size_t k = 0; k < ops.size(); ++k) {
          if (ops[k] == OpKind::Exp) exps.push_back(k);
        }
        if (exps.empty()) continue;
        const std::size_t e = exps[d.index(exps.size())];
        add(b.add_op(op, {NodeId{e}}, dims[e]), dims[e], op, exp_depth[e]);
        break;
      }
      case OpKind::ReLU:
      case OpKind::Neg:
        add(b.add_op(op, {ia}, dims[a]), dims[a], op, exp_depth[a]);
        break;
      case OpKind::SumReduce:
        add(b.add_op(op, {ia}, 1), 1, op, exp_depth[a]);
        break;
      case OpKind::Add:
      case OpKind::Sub:
      case OpKind::MulElementwise: {
        std::vector<std::size_t> same;
        for (std::size_t k = 0; k < dims.size(); ++k) {
          if (dims[k] == dims[a]) same.push_back(k);
        }
        const std::size_t c = same[d.index(same.size())];
        const int depth = std::max(exp_depth[a], exp_depth[c]);
        // Products of exponentials grow fast; keep at most one Exp level.
        if (op == OpKind::MulElementwise && exp_depth[a] > 0 && exp_depth[c] > 0) continue;
        add(b.add_op(op, {ia, NodeId{c}}, dims[a]), dims[a], op, depth);
        break;
      }
      case OpKind::Input:
        break;
    }
  }
  b.set_output(NodeId{dims.size() - 1});
  Graph g = b.build();
  specs.resize(g.size());
  return {std::move(g), std::move(specs)};
}

}  // namespace

// Rejects draws whose interval boxes exceed 1e3 in magnitude, so an absolute
// slack stays meaningful in soundness checks.
Instance random_graph(std::mt19937_64& rng, const RandomGraphOptions& options) {
  for (;;) {
    Instance inst = random_graph_once(rng, options);
    try {
      const IntervalMap boxes = ibp_propagate(inst.graph, inst.specs);
      bool small = true;
      for (const Node& n : inst.graph.nodes()) {
        const IntervalBounds& box = boxes.at(n.id);
        small = small && box.lower.allFinite() && box.upper.allFinite() && box.lower.cwiseAbs().maxCoeff() <= 1e3 &&
                box.upper.cwiseAbs().maxCoeff() <= 1e3;
      }
      if (small) return inst;
    } catch (const DomainError&) {
    }
  }
}

Instance random_classifier(std::mt19937_64& rng, std::size_t num_classes, std::size_t hidden, std::size_t layers,
                           double eps) {
  Draw d{rng};
  GraphBuilder b;
  const std::size_t in_dim = 2 + d.index(3);
  NodeId h = b.add_input(in_dim);
  const NodeId x = h;
  b.mark_perturbed(x);
  std::size_t dim = in_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(hidden);
    h = b.add_affine(h, d.matrix(rows, static_cast<Eigen::Index>(dim), 1.0), d.vector(rows, 0.3));
    h = b.add_op(OpKind::ReLU, {h}, hidden);
    dim = hidden;
  }
  const auto k = static_cast<Eigen::Index>(num_classes);
  h = b.add_affine(h, d.matrix(k, static_cast<Eigen::Index>(dim), 1.0), d.vector(k, 0.3));
  b.set_output(h);
  Instance inst{b.build(), {}};
  inst.specs.resize(inst.graph.size());
  inst.specs.set(x, LpBallSpec{d.vector(static_cast<Eigen::Index>(in_dim), 1.0), eps,
                               d.chance(0.5) ? kInfinity : 2.0});
  return inst;
}

Vector stack_perturbed(const PerturbationLayout& layout, const Assignment& a) {
  Vector x(static_cast<Eigen::Index>(layout.total_dim()));
  for (const auto& block : layout.blocks()) {
    x.segment(static_cast<Eigen::Index>(block.offset), static_cast<Eigen::Index>(block.width)) = a.at(block.node);
  }
  return x;
}

Assignment nominal_assignment(const Graph& g, const SpecMap& specs) {
  Assignment a(g.size());
  for (const Node& n : g.nodes()) {
    if (n.is_independent()) a.set(n.id, nominal_value(specs.at(n.id)));
  }
  return a;
}

SpecMap scale_eps(const SpecMap& specs, double scale) {
  SpecMap out = specs;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto* s = out.find(NodeId{i})) {
      if (auto* ball = std::get_if<LpBallSpec>(s)) ball->eps *= scale;
    }
  }
  return out;
}

}  // namespace lirpa::testing
