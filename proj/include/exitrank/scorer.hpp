#ifndef EXITRANK_SCORER_HPP
#define EXITRANK_SCORER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "exitrank/dataset.hpp"
#include "exitrank/ensemble.hpp"

namespace exitrank {

/// Tree index at which the exit strategy fires: the number of trees
/// evaluated before the Continue/Exit decision. Valid range is 1..T.
struct SentinelConfig {
  int s = 50;
};

/// Both backends accumulate per-document sums in ascending tree order, so
/// their partial scores are bit-identical. TreeMajor walks each tree over
/// the query's documents as a block.
enum class ScoreBackend { DocumentMajor, TreeMajor };

struct DocState {
  double partial_score = 0.0;        // base + first s trees
  int sentinel_rank = 0;             // 1-based, by descending partial score
  std::optional<bool> continued;     // strategy decision
  std::optional<double> full_score;  // set iff continued == true
};

/// Per-query scoring state around a sentinel.
struct ScoringState {
  std::vector<DocState> docs;  // indexed by doc_index
  int n_candidates = 0;
};

/// Exact, deterministic traversal counters, additive across queries.
struct TraversalCost {
  std::uint64_t ranker_trees = 0;    // ranker tree evaluations
  std::uint64_t strategy_trees = 0;  // classifier tree evaluations
  std::optional<std::uint64_t> strategy_overhead_ns;  // strategy compute time
  std::optional<std::uint64_t> wall_ns;  // end-to-end measured latency

  TraversalCost& operator+=(const TraversalCost& other);
};

/// Indices 0..n-1 ordered by descending score, ties by ascending index.
std::vector<int> rank_descending(std::span<const double> scores);

/// Evaluates the first s trees for every document of the group, assigns
/// sentinel ranks, and charges n*s ranker trees to `cost`.
ScoringState score_prefix(const Ensemble& ens, const QueryGroup& group,
                          SentinelConfig sentinel, TraversalCost& cost,
                          ScoreBackend backend = ScoreBackend::TreeMajor);

/// Evaluates trees s..T-1 for every continued document and charges T-s
/// ranker trees each; exited documents are untouched. Throws if any
/// document's decision is missing.
void resume_scoring(const Ensemble& ens, const QueryGroup& group,
                    ScoringState& state, SentinelConfig sentinel,
                    TraversalCost& cost);

/// Test surface: true iff both backends produce bit-identical partial
/// scores and sentinel ranks for this group.
bool backend_equivalence(const Ensemble& ens, const QueryGroup& group,
                         SentinelConfig sentinel);

/// Documents ordered by descending full-ensemble score, ties by ascending
/// doc_index. No cost accounting.
std::vector<int> full_ranking(const Ensemble& ens, const QueryGroup& group);

}  // namespace exitrank

#endif  // EXITRANK_SCORER_HPP
