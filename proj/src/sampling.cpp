#include "lirpa/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace lirpa {

namespace {

Vector sample_ball(const LpBallSpec& b, std::mt19937_64& rng) {
  const Eigen::Index n = b.center.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const bool boundary = unit(rng) < 0.25;
  Vector d(n);

  if (std::isinf(b.p)) {
    for (Eigen::Index k = 0; k < n; ++k) d[k] = boundary ? (unit(rng) < 0.5 ? -1.0 : 1.0) : sym(rng);
    return b.center + b.eps * d;
  }
  if (b.p == 1.0 && boundary) {
    d.setZero();
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    d[pick(rng)] = unit(rng) < 0.5 ? -1.0 : 1.0;
    return b.center + b.eps * d;
  }
  if (b.p == 2.0) {
    std::normal_distribution<double> normal;
    for (Eigen::Index k = 0; k < n; ++k) d[k] = normal(rng);
    const double len = d.norm();
    if (len == 0.0) return b.center;
    const double r = boundary ? 1.0 : std::pow(unit(rng), 1.0 / static_cast<double>(n));
    return b.center + b.eps * r * d / len;
  }
  // Generic p: a random direction rescaled to a random radius of the p-norm.
  for (Eigen::Index k = 0; k < n; ++k) d[k] = sym(rng);
  const double len = std::pow(d.array().abs().pow(b.p).sum(), 1.0 / b.p);
  if (len == 0.0) return b.center;
  const double r = boundary ? 1.0 : unit(rng);
  return b.center + b.eps * r * d / len;
}

Vector sample_sentence(const SynonymSpec& s, std::mt19937_64& rng) {
  const auto e = static_cast<Eigen::Index>(s.embedding_dim());
  std::vector<std::size_t> positions;
  for (std::size_t t = 0; t < s.length(); ++t) {
    if (!s.substitutions[t].empty()) positions.push_back(t);
  }
  std::shuffle(positions.begin(), positions.end(), rng);
  const auto cap = std::min<std::size_t>(positions.size(), static_cast<std::size_t>(s.budget));
  const std::size_t swaps = std::uniform_int_distribution<std::size_t>(0, cap)(rng);

  Vector v = s.clean_value();
  for (std::size_t k = 0; k < swaps; ++k) {
    const std::size_t t = positions[k];
    const auto& subs = s.substitutions[t];
    const auto& w = subs[std::uniform_int_distribution<std::size_t>(0, subs.size() - 1)(rng)];
    v.segment(static_cast<Eigen::Index>(t) * e, e) = s.embedding(w);
  }
  return v;
}

}  // namespace

Vector sample_point(const PerturbationSpec& spec, std::mt19937_64& rng) {
  if (const auto* c = std::get_if<ConstantSpec>(&spec)) return c->value;
  if (const auto* b = std::get_if<LpBallSpec>(&spec)) return sample_ball(*b, rng);
  return sample_sentence(std::get<SynonymSpec>(spec), rng);
}

Assignment sample_assignment(const Graph& g, const SpecMap& specs, std::mt19937_64& rng) {
  Assignment a(g.size());
  for (const Node& n : g.nodes()) {
    if (n.is_independent()) a.set(n.id, sample_point(specs.at(n.id), rng));
  }
  return a;
}

}  // namespace lirpa
