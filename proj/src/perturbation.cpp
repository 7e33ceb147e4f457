#include "lirpa/perturbation.hpp"

#include <cmath>

namespace lirpa {

double LpBallSpec::dual_exponent() const {
  if (!(p >= 1.0)) throw PreconditionError("lp ball requires p >= 1");
  if (p == 1.0) return kInfinity;
  if (p == 2.0) return 2.0;
  if (std::isinf(p)) return 1.0;
  return 1.0 / (1.0 - 1.0 / p);
}

std::size_t SynonymSpec::embedding_dim() const {
  if (embeddings.empty()) return 0;
  return static_cast<std::size_t>(embeddings.begin()->second.size());
}

const Vector& SynonymSpec::embedding(const std::string& word) const {
  auto it = embeddings.find(word);
  if (it == embeddings.end()) throw PreconditionError("no embedding for word '" + word + "'");
  return it->second;
}

Vector SynonymSpec::clean_value() const {
  const auto e = static_cast<Eigen::Index>(embedding_dim());
  Vector v(e * static_cast<Eigen::Index>(words.size()));
  for (std::size_t t = 0; t < words.size(); ++t) {
    v.segment(static_cast<Eigen::Index>(t) * e, e) = embedding(words[t]);
  }
  return v;
}

void SynonymSpec::validate() const {
  if (embeddings.empty()) throw PreconditionError("synonym spec has no embeddings");
  const auto e = embedding_dim();
  if (e == 0) throw PreconditionError("synonym embeddings must be non-empty");
  for (const auto& [word, vec] : embeddings) {
    if (static_cast<std::size_t>(vec.size()) != e) {
      throw PreconditionError("embedding of '" + word + "' has inconsistent dimension");
    }
  }
  if (substitutions.size() != words.size()) {
    throw PreconditionError("substitution table must have one entry per position");
  }
  if (budget < 0) throw PreconditionError("synonym budget must be non-negative");
  for (std::size_t t = 0; t < words.size(); ++t) {
    (void)embedding(words[t]);
    for (const auto& w : substitutions[t]) (void)embedding(w);
  }
}

bool is_perturbed(const PerturbationSpec& spec) { return !std::holds_alternative<ConstantSpec>(spec); }

Vector nominal_value(const PerturbationSpec& spec) {
  if (const auto* c = std::get_if<ConstantSpec>(&spec)) return c->value;
  if (const auto* b = std::get_if<LpBallSpec>(&spec)) return b->center;
  return std::get<SynonymSpec>(spec).clean_value();
}

std::size_t spec_dim(const PerturbationSpec& spec) {
  if (const auto* s = std::get_if<SynonymSpec>(&spec)) return s->length() * s->embedding_dim();
  return static_cast<std::size_t>(nominal_value(spec).size());
}

PerturbationLayout::PerturbationLayout(const Graph& g, const SpecMap& specs) {
  for (const Node& n : g.nodes()) {
    if (!n.is_independent()) continue;
    const PerturbationSpec* spec = specs.find(n.id);
    if (spec == nullptr) {
      throw PreconditionError("input node " + std::to_string(n.id.value) + " has no perturbation spec");
    }
    if (spec_dim(*spec) != n.dim) {
      throw PreconditionError("spec for input node " + std::to_string(n.id.value) + " has dimension " +
                              std::to_string(spec_dim(*spec)) + ", node has " + std::to_string(n.dim));
    }
    if (const auto* b = std::get_if<LpBallSpec>(spec)) {
      if (!(b->eps >= 0.0)) throw PreconditionError("lp ball radius must be non-negative");
      (void)b->dual_exponent();
    }
    if (const auto* s = std::get_if<SynonymSpec>(spec)) s->validate();
    if (is_perturbed(*spec)) {
      blocks_.push_back({n.id, total_, n.dim});
      total_ += n.dim;
    }
  }
}

const PerturbationLayout::Block* PerturbationLayout::find(NodeId id) const {
  for (const auto& b : blocks_) {
    if (b.node == id) return &b;
  }
  return nullptr;
}

}  // namespace lirpa
