#include "exitrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace exitrank {

namespace {

double gain_of(int relevance, NdcgGain gain) {
  if (gain == NdcgGain::Exponential) {
    return std::ldexp(1.0, relevance) - 1.0;
  }
  return static_cast<double>(relevance);
}

double dcg(std::span<const int> rels_in_rank_order, int k,
           const NdcgOptions& opts) {
  std::size_t depth =
      std::min(rels_in_rank_order.size(), static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    total += gain_of(rels_in_rank_order[i], opts.gain) /
             std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

}  // namespace

QueryNdcg query_ndcg(std::span<const int> ranking,
                     std::span<const int> relevances, int k,
                     const NdcgOptions& opts) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::size_t n = relevances.size();
  if (ranking.size() != n) {
    throw std::invalid_argument("ranking is not a permutation: length " +
                                std::to_string(ranking.size()) + " vs " +
                                std::to_string(n) + " documents");
  }
  std::vector<bool> seen(n, false);
  std::vector<int> ranked_rels(n);
  for (std::size_t i = 0; i < n; ++i) {
    int d = ranking[i];
    if (d < 0 || static_cast<std::size_t>(d) >= n ||
        seen[static_cast<std::size_t>(d)]) {
      throw std::invalid_argument("ranking is not a permutation of 0.." +
                                  std::to_string(n - 1));
    }
    seen[static_cast<std::size_t>(d)] = true;
    ranked_rels[i] = relevances[static_cast<std::size_t>(d)];
  }

  std::vector<int> ideal(relevances.begin(), relevances.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());

  double idcg = dcg(ideal, k, opts);
  if (idcg == 0.0) return {1.0, true};
  return {dcg(ranked_rels, k, opts) / idcg, false};
}

double ndcg_at_k(std::span<const int> ranking, std::span<const int> relevances,
                 int k, const NdcgOptions& opts) {
  return query_ndcg(ranking, relevances, k, opts).value;
}

double mean_ndcg(std::span<const QueryNdcg> per_query,
                 ZeroIdcgPolicy policy) {
  if (per_query.empty()) throw std::invalid_argument("no queries");
  double total = 0.0;
  std::size_t counted = 0;
  for (const QueryNdcg& q : per_query) {
    if (policy == ZeroIdcgPolicy::Skip && q.zero_idcg) continue;
    total += q.value;
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument("every query has zero ideal DCG");
  }
  return total / static_cast<double>(counted);
}

PrecisionRecall precision_recall(std::span<const ExitLabel> truth,
                                 std::span<const ExitLabel> predicted) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("label vectors differ in length");
  }
  auto one_class = [&](ExitLabel cls) {
    std::size_t tp = 0, pred_pos = 0, actual_pos = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      bool t = truth[i] == cls;
      bool p = predicted[i] == cls;
      tp += t && p;
      pred_pos += p;
      actual_pos += t;
    }
    ClassMetrics m;
    if (pred_pos > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(pred_pos);
    }
    if (actual_pos > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(actual_pos);
    }
    return m;
  };
  return {one_class(ExitLabel::Continue), one_class(ExitLabel::Exit)};
}

double speedup(const TraversalCost& ee, const TraversalCost& full,
               CostMode mode) {
  if (mode == CostMode::TreeCount) {
    std::uint64_t denom = ee.ranker_trees + ee.strategy_trees;
    if (denom == 0) throw std::invalid_argument("zero early-exit tree cost");
    return static_cast<double>(full.ranker_trees) /
           static_cast<double>(denom);
  }
  if (!ee.wall_ns || !full.wall_ns) {
    throw std::invalid_argument("wall-clock speedup requires measured times");
  }
  if (*ee.wall_ns == 0) throw std::invalid_argument("zero early-exit time");
  return static_cast<double>(*full.wall_ns) / static_cast<double>(*ee.wall_ns);
}

CutStats cut_statistics(std::span<const int> continued_counts) {
  if (continued_counts.empty()) throw std::invalid_argument("no queries");
  double n = static_cast<double>(continued_counts.size());
  double mean = 0.0;
  for (int c : continued_counts) mean += static_cast<double>(c);
  mean /= n;
  double var = 0.0;
  for (int c : continued_counts) {
    double d = static_cast<double>(c) - mean;
    var += d * d;
  }
  var /= n;
  return {mean, std::sqrt(var)};
}

}  // namespace exitrank
