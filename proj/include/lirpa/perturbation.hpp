#pragma once

#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "lirpa/graph.hpp"

namespace lirpa {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Unperturbed value of an independent node.
struct ConstantSpec {
  Vector value;
};

/// { X : ||X - center||_p <= eps }, p in [1, inf].
struct LpBallSpec {
  Vector center;
  double eps = 0.0;
  double p = kInfinity;

  /// Dual exponent q with 1/p + 1/q = 1.
  double dual_exponent() const;
};

/// A word sequence where at most `budget` positions may be swapped for a word
/// from that position's substitution set. The node value is the concatenation
/// of the per-position embeddings.
struct SynonymSpec {
  std::map<std::string, Vector> embeddings;
  std::vector<std::string> words;
  /// Parallel to `words`; an empty set means the word cannot change.
  std::vector<std::vector<std::string>> substitutions;
  int budget = 0;

  std::size_t length() const { return words.size(); }
  std::size_t embedding_dim() const;
  const Vector& embedding(const std::string& word) const;
  /// Concatenated embeddings of the clean sentence.
  Vector clean_value() const;
  /// Throws PreconditionError when the table is inconsistent.
  void validate() const;
};

using PerturbationSpec = std::variant<ConstantSpec, LpBallSpec, SynonymSpec>;
using SpecMap = NodeMap<PerturbationSpec>;

bool is_perturbed(const PerturbationSpec& spec);
/// Nominal (clean) value: constant value, ball center, or clean embeddings.
Vector nominal_value(const PerturbationSpec& spec);
std::size_t spec_dim(const PerturbationSpec& spec);

/// Column blocks of the concatenated perturbed coordinates X. Perturbed
/// inputs are laid out in ascending id order.
class PerturbationLayout {
 public:
  struct Block {
    NodeId node;
    std::size_t offset = 0;
    std::size_t width = 0;
  };

  PerturbationLayout() = default;
  /// Throws PreconditionError if some Input of `g` has no spec or a spec of
  /// the wrong dimension.
  PerturbationLayout(const Graph& g, const SpecMap& specs);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block* find(NodeId id) const;
  std::size_t total_dim() const { return total_; }

 private:
  std::vector<Block> blocks_;
  std::size_t total_ = 0;
};

}  // namespace lirpa
