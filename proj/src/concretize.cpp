#include "lirpa/concretize.hpp"

#include <algorithm>
#include <cmath>

namespace lirpa {

namespace {

// sum_c w(row, offset + c) * e[c], accumulated left to right.
Vector embedding_term(const Matrix& w, Eigen::Index offset, const Vector& e) {
  Vector out(w.rows());
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < e.size(); ++c) acc += w(r, offset + c) * e[c];
    out[r] = acc;
  }
  return out;
}

void check_block(const LinearBounds& lb, std::size_t width, const char* who) {
  if (static_cast<std::size_t>(lb.cols()) != width || lb.upper_weight.cols() != lb.cols()) {
    throw PreconditionError(std::string(who) + ": bounds have " + std::to_string(lb.cols()) +
                            " columns but the perturbation has dimension " + std::to_string(width));
  }
}

struct LpContribution {
  Vector lower;
  Vector upper;
};

LpContribution lp_terms(const Matrix& wl, const Matrix& wu, const LpBallSpec& spec) {
  const double q = spec.dual_exponent();
  if (!(spec.eps >= 0.0)) throw PreconditionError("lp ball radius must be non-negative");
  LpContribution c{wl * spec.center, wu * spec.center};
  if (spec.eps > 0.0) {
    c.lower -= spec.eps * row_norms(wl, q);
    c.upper += spec.eps * row_norms(wu, q);
  }
  return c;
}

DpTable fill_table(const Matrix& wl, const Matrix& wu, Eigen::Index offset, const SynonymSpec& spec,
                   const Vector& start_lower, const Vector& start_upper) {
  const std::size_t n = spec.length();
  const auto e = static_cast<Eigen::Index>(spec.embedding_dim());
  const std::size_t max_j = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(spec.budget, 0)));
  const Eigen::Index rows = start_lower.size();

  DpTable t;
  t.lower.assign(n + 1, std::vector<Vector>(max_j + 1, Vector::Constant(rows, kInfinity)));
  t.upper.assign(n + 1, std::vector<Vector>(max_j + 1, Vector::Constant(rows, -kInfinity)));
  t.lower[0][0] = start_lower;
  t.upper[0][0] = start_upper;

  for (std::size_t i = 1; i <= n; ++i) {
    const Eigen::Index col = offset + static_cast<Eigen::Index>(i - 1) * e;
    const Vector& clean = spec.embedding(spec.words[i - 1]);
    const Vector keep_lo = embedding_term(wl, col, clean);
    const Vector keep_hi = embedding_term(wu, col, clean);
    Vector swap_lo = Vector::Constant(rows, kInfinity);
    Vector swap_hi = Vector::Constant(rows, -kInfinity);
    for (const auto& w : spec.substitutions[i - 1]) {
      swap_lo = swap_lo.cwiseMin(embedding_term(wl, col, spec.embedding(w)));
      swap_hi = swap_hi.cwiseMax(embedding_term(wu, col, spec.embedding(w)));
    }
    for (std::size_t j = 0; j <= std::min(i, max_j); ++j) {
      Vector lo = t.lower[i - 1][j] + keep_lo;
      Vector hi = t.upper[i - 1][j] + keep_hi;
      if (j > 0) {
        lo = lo.cwiseMin(t.lower[i - 1][j - 1] + swap_lo);
        hi = hi.cwiseMax(t.upper[i - 1][j - 1] + swap_hi);
      }
      t.lower[i][j] = std::move(lo);
      t.upper[i][j] = std::move(hi);
    }
  }
  return t;
}

IntervalBounds table_extremes(const DpTable& t) {
  const auto& last_lo = t.lower.back();
  const auto& last_hi = t.upper.back();
  IntervalBounds out{last_lo[0], last_hi[0]};
  for (std::size_t j = 1; j < last_lo.size(); ++j) {
    out.lower = out.lower.cwiseMin(last_lo[j]);
    out.upper = out.upper.cwiseMax(last_hi[j]);
  }
  return out;
}

}  // namespace

Vector row_norms(const Matrix& m, double q) {
  if (!(q >= 1.0)) throw PreconditionError("norm exponent must be >= 1");
  if (std::isinf(q)) return m.cwiseAbs().rowwise().maxCoeff();
  if (q == 1.0) return m.cwiseAbs().rowwise().sum();
  if (q == 2.0) return m.rowwise().norm();
  return m.cwiseAbs().array().pow(q).rowwise().sum().pow(1.0 / q).matrix();
}

IntervalBounds concretize_lp(const LinearBounds& lb, const LpBallSpec& spec) {
  check_block(lb, static_cast<std::size_t>(spec.center.size()), "concretize_lp");
  const LpContribution c = lp_terms(lb.lower_weight, lb.upper_weight, spec);
  return {c.lower + lb.lower_bias, c.upper + lb.upper_bias};
}

DpTable synonym_dp_table(const LinearBounds& lb, const SynonymSpec& spec) {
  spec.validate();
  check_block(lb, spec.length() * spec.embedding_dim(), "synonym_dp_table");
  return fill_table(lb.lower_weight, lb.upper_weight, 0, spec, lb.lower_bias, lb.upper_bias);
}

IntervalBounds concretize_synonym_dp(const LinearBounds& lb, const SynonymSpec& spec) {
  return table_extremes(synonym_dp_table(lb, spec));
}

IntervalBounds brute_force_synonym(const LinearBounds& lb, const SynonymSpec& spec, std::size_t max_assignments) {
  spec.validate();
  check_block(lb, spec.length() * spec.embedding_dim(), "brute_force_synonym");
  const std::size_t n = spec.length();
  const auto e = static_cast<Eigen::Index>(spec.embedding_dim());

  std::size_t total = 1;
  for (const auto& subs : spec.substitutions) {
    total *= subs.size() + 1;
    if (total > max_assignments) {
      throw PreconditionError("brute_force_synonym: more than " + std::to_string(max_assignments) +
                              " assignments");
    }
  }

  // choice[t] == 0 keeps the clean word, k > 0 picks substitutions[t][k-1].
  std::vector<std::size_t> choice(n, 0);
  IntervalBounds best{Vector::Constant(lb.rows(), kInfinity), Vector::Constant(lb.rows(), -kInfinity)};
  for (std::size_t a = 0; a < total; ++a) {
    int changed = 0;
    for (std::size_t t = 0; t < n; ++t) changed += choice[t] != 0 ? 1 : 0;
    if (changed <= spec.budget) {
      Vector lo = lb.lower_bias;
      Vector hi = lb.upper_bias;
      for (std::size_t t = 0; t < n; ++t) {
        const std::string& word = choice[t] == 0 ? spec.words[t] : spec.substitutions[t][choice[t] - 1];
        const Vector& emb = spec.embedding(word);
        const Eigen::Index col = static_cast<Eigen::Index>(t) * e;
        for (Eigen::Index r = 0; r < lb.rows(); ++r) {
          double s_lo = 0.0;
          double s_hi = 0.0;
          for (Eigen::Index c = 0; c < e; ++c) {
            s_lo += lb.lower_weight(r, col + c) * emb[c];
            s_hi += lb.upper_weight(r, col + c) * emb[c];
          }
          lo[r] += s_lo;
          hi[r] += s_hi;
        }
      }
      best.lower = best.lower.cwiseMin(lo);
      best.upper = best.upper.cwiseMax(hi);
    }
    // Mixed-radix increment.
    for (std::size_t t = 0; t < n; ++t) {
      if (++choice[t] <= spec.substitutions[t].size()) break;
      choice[t] = 0;
    }
  }
  return best;
}

IntervalBounds concretize(const LinearBounds& lb, const PerturbationLayout& layout, const SpecMap& specs) {
  if (static_cast<std::size_t>(lb.cols()) != layout.total_dim()) {
    throw PreconditionError("concretize: bounds have " + std::to_string(lb.cols()) + " columns, layout has " +
                            std::to_string(layout.total_dim()));
  }
  Vector lower = lb.lower_bias;
  Vector upper = lb.upper_bias;
  for (const auto& block : layout.blocks()) {
    const auto off = static_cast<Eigen::Index>(block.offset);
    const auto width = static_cast<Eigen::Index>(block.width);
    const PerturbationSpec& spec = specs.at(block.node);
    if (const auto* ball = std::get_if<LpBallSpec>(&spec)) {
      const LpContribution c =
          lp_terms(lb.lower_weight.middleCols(off, width), lb.upper_weight.middleCols(off, width), *ball);
      lower += c.lower;
      upper += c.upper;
    } else if (const auto* syn = std::get_if<SynonymSpec>(&spec)) {
      const DpTable t = fill_table(lb.lower_weight, lb.upper_weight, off, *syn, lower, upper);
      const IntervalBounds ext = table_extremes(t);
      lower = ext.lower;
      upper = ext.upper;
    } else {
      throw PreconditionError("constant inputs have no coordinate block");
    }
  }
  return {lower, upper};
}

}  // namespace lirpa
