#ifndef EXITRANK_STRATEGIES_HPP
#define EXITRANK_STRATEGIES_HPP

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "exitrank/dataset.hpp"
#include "exitrank/ensemble.hpp"
#include "exitrank/gbdt.hpp"
#include "exitrank/scorer.hpp"

namespace exitrank {

/// No early exit; every document is scored by the whole ensemble.
struct FullParams {};

/// Keep only the top-k_s documents by partial score at the sentinel.
struct ErtParams {
  int k_s = 15;
};

/// Keep every document whose partial score is within p of the k_s-th best.
struct EptParams {
  int k_s = 15;
  double p = 0.5;
};

/// Learned exit: keep documents the classifier assigns Continue probability
/// >= tau, from the augmented sentinel features.
struct LearParams {
  std::shared_ptr<const Forest> classifier;
  double tau = 0.5;
};

/// Oracle: per query, the minimal sentinel-rank prefix containing all of
/// the full ensemble's top-k documents.
struct IdealParams {
  int k = 10;
};

using StrategyParams =
    std::variant<FullParams, IdealParams, ErtParams, EptParams, LearParams>;

/// Continue/Exit verdict for every document of one query.
struct ExitDecision {
  std::vector<bool> continued;   // indexed by doc_index
  std::optional<int> ideal_cut;  // per-query cut k_s^q, Ideal only

  int continued_count() const;
};

ExitDecision apply_ert(const ScoringState& state, int k_s);

/// sigma is the partial score of the rank-k_s document (the minimum partial
/// score when the query has fewer than k_s documents); documents with
/// partial score >= sigma - p continue.
ExitDecision apply_ept(const ScoringState& state, int k_s, double p);

/// Charges the classifier's tree count per document to cost.strategy_trees.
/// Throws if the classifier arity does not match the augmented layout.
ExitDecision apply_lear(const ScoringState& state, const QueryGroup& group,
                        const Forest& classifier, double tau,
                        TraversalCost& cost);

/// full_top_k must be the query's top-k under full-ensemble scoring. The
/// cut is the maximum sentinel rank among those documents (n when n <= k);
/// documents at sentinel rank <= cut continue.
ExitDecision ideal_cut(const ScoringState& state,
                       std::span<const int> full_top_k, int k);

/// Copies the decision into the per-document state.
void set_decisions(ScoringState& state, const ExitDecision& decision);

/// Two-segment ranking: continued documents by descending full score, then
/// exited documents by descending partial score, ties by ascending
/// doc_index. With merge_by_score, one pool ordered by the document's
/// effective (full if continued, else partial) score.
std::vector<int> assemble_ranking(const ScoringState& state,
                                  bool merge_by_score = false);

struct PipelineOptions {
  bool merge_by_score = false;
  int threads = 1;
  ScoreBackend backend = ScoreBackend::TreeMajor;
  /// Accumulate wall-clock time spent inside strategy decisions.
  bool measure_strategy_overhead = false;
};

struct QueryOutcome {
  std::vector<int> ranking;  // doc_index order, best first
  ExitDecision decision;
};

struct PipelineResult {
  std::vector<QueryOutcome> queries;  // parallel to ds.groups
  TraversalCost cost;

  std::vector<int> continued_counts() const;
};

/// Per query: score_prefix, apply the strategy, resume_scoring, assemble.
/// The Ideal oracle's internal full scoring is free by definition; its cost
/// counts only the prefix plus continued documents' remaining trees.
PipelineResult run_pipeline(const Ensemble& ens, const Dataset& ds,
                            SentinelConfig sentinel,
                            const StrategyParams& params,
                            const PipelineOptions& opts = {});

/// Baseline cost of scoring every document with every tree.
TraversalCost full_scoring_cost(const Ensemble& ens, const Dataset& ds);

}  // namespace exitrank

#endif  // EXITRANK_STRATEGIES_HPP
