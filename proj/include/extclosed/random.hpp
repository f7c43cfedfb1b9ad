#pragma once

#include <random>

#include "extclosed/structure.hpp"

namespace extclosed {

using Rng = std::mt19937_64;

struct RandomStructureOptions {
  int min_size = 1;
  int max_size = 6;
  /// Probability that a candidate tuple of a non-order relation is present.
  double density = 0.3;
  /// Make S a subset of the successor pairs of the order.
  bool partial_successor = false;
  /// For partial successors: probability each successor pair is kept.
  double successor_density = 0.8;
};

/// Random structure over `vocab`: `<=` (if present) is the natural order,
/// other relations are random, constants uniform.
Structure random_structure(const Vocabulary& vocab, Rng& rng, const RandomStructureOptions& options = {});

struct RandomExtensionOptions {
  int max_new_elements = 3;
  /// Expected number of new tuples per non-order relation.
  double tuples_per_relation = 2.0;
};

/// A random B with A an induced substructure of B: new elements are inserted
/// at random positions of the order and every added tuple mentions one.
/// Returns B and the embedding of A's elements into B.
struct Extension {
  Structure structure;
  std::vector<Element> embedding;  // embedding[a] for a in 1..|A|; index 0 unused
};
Extension random_extension(const Structure& A, Rng& rng, const RandomExtensionOptions& options = {});

/// Random sigma_2 structure shaped like the level-2 constructions: S a
/// partial successor, P2 a random subset, S2 mostly linking consecutive P2
/// points, R biased towards short intervals between them, and R2 only
/// between P2 points. PartialSucc_2 may still fail; callers filter.
Structure random_layered_structure(Rng& rng, int max_size);

/// A pair of structures over `vocab` (which must contain `<=`) for game
/// experiments, drawn from a mix of independent structures, identical
/// copies, extensions fixing min and max, and long successor chains, so
/// that implications between them hold reasonably often.
std::pair<Structure, Structure> random_game_pair(const Vocabulary& vocab, Rng& rng, int max_size);

}  // namespace extclosed
