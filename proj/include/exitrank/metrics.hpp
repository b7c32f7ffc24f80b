#ifndef EXITRANK_METRICS_HPP
#define EXITRANK_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "exitrank/exitset.hpp"
#include "exitrank/scorer.hpp"

namespace exitrank {

enum class NdcgGain { Exponential, Linear };
enum class ZeroIdcgPolicy { ScoreOne, Skip };

struct NdcgOptions {
  NdcgGain gain = NdcgGain::Exponential;
  ZeroIdcgPolicy zero_idcg = ZeroIdcgPolicy::ScoreOne;
};

/// DCG@k = sum_{i=1..min(k,n)} gain(rel_i) / log2(i+1) with exponential
/// gain 2^rel - 1 by default; NDCG = DCG/IDCG. Queries with IDCG = 0 score
/// 1.0. `ranking` must be a permutation of 0..n-1.
double ndcg_at_k(std::span<const int> ranking, std::span<const int> relevances,
                 int k, const NdcgOptions& opts = {});

struct QueryNdcg {
  double value = 0.0;
  bool zero_idcg = false;
};

/// Per-query NDCG plus the zero-IDCG marker, so aggregation can either
/// count such queries as 1.0 or skip them.
QueryNdcg query_ndcg(std::span<const int> ranking,
                     std::span<const int> relevances, int k,
                     const NdcgOptions& opts = {});

/// Mean over queries under the chosen zero-IDCG policy. With Skip and no
/// scorable query, throws.
double mean_ndcg(std::span<const QueryNdcg> per_query, ZeroIdcgPolicy policy);

struct ClassMetrics {
  double precision = 1.0;
  double recall = 1.0;
};

struct PrecisionRecall {
  ClassMetrics continue_cls;
  ClassMetrics exit_cls;
};

/// Standard per-class precision/recall. A class with zero predicted
/// positives reports precision 1.0; zero actual positives reports
/// recall 1.0.
PrecisionRecall precision_recall(std::span<const ExitLabel> truth,
                                 std::span<const ExitLabel> predicted);

enum class CostMode { TreeCount, WallClock };

/// TreeCount: full.ranker_trees / (ee.ranker_trees + ee.strategy_trees).
/// WallClock: ratio of measured latencies (both costs must carry wall_ns).
double speedup(const TraversalCost& ee, const TraversalCost& full,
               CostMode mode);

struct CutStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

/// Mean and population stddev of per-query continued counts (k_s^mu and
/// k_s^sigma). Throws on empty input.
CutStats cut_statistics(std::span<const int> continued_counts);

/// One row of an efficiency/effectiveness sweep.
struct TradeoffPoint {
  std::string strategy;
  int sentinel = 0;
  double threshold = 0.0;  // k_s, p, tau, or k depending on the strategy
  double ndcg = 0.0;
  double delta_pct = 0.0;  // 100 * (ndcg - ndcg_full) / ndcg_full
  double speedup = 0.0;
  double ks_mu = 0.0;
  double ks_sigma = 0.0;
};

}  // namespace exitrank

#endif  // EXITRANK_METRICS_HPP
