#include "exitrank/scorer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace exitrank {

TraversalCost& TraversalCost::operator+=(const TraversalCost& other) {
  ranker_trees += other.ranker_trees;
  strategy_trees += other.strategy_trees;
  if (other.strategy_overhead_ns) {
    strategy_overhead_ns =
        strategy_overhead_ns.value_or(0) + *other.strategy_overhead_ns;
  }
  if (other.wall_ns) {
    wall_ns = wall_ns.value_or(0) + *other.wall_ns;
  }
  return *this;
}

std::vector<int> rank_descending(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double sa = scores[static_cast<std::size_t>(a)];
    double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

namespace {

void check_sentinel(const Ensemble& ens, SentinelConfig sentinel) {
  if (sentinel.s < 1 || sentinel.s > ens.num_trees()) {
    throw std::invalid_argument(
        "sentinel " + std::to_string(sentinel.s) + " outside 1.." +
        std::to_string(ens.num_trees()));
  }
}

void check_arity(const Ensemble& ens, const QueryGroup& group) {
  for (const auto& doc : group.documents) {
    if (doc.features.size() != static_cast<std::size_t>(ens.num_features)) {
      throw std::invalid_argument(
          "document feature length " + std::to_string(doc.features.size()) +
          " does not match model num_features " +
          std::to_string(ens.num_features));
    }
  }
}

void assign_ranks(ScoringState& state) {
  std::vector<double> partials(state.docs.size());
  for (std::size_t d = 0; d < state.docs.size(); ++d) {
    partials[d] = state.docs[d].partial_score;
  }
  auto order = rank_descending(partials);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    state.docs[static_cast<std::size_t>(order[pos])].sentinel_rank =
        static_cast<int>(pos) + 1;
  }
}

}  // namespace

ScoringState score_prefix(const Ensemble& ens, const QueryGroup& group,
                          SentinelConfig sentinel, TraversalCost& cost,
                          ScoreBackend backend) {
  check_sentinel(ens, sentinel);
  check_arity(ens, group);

  std::size_t n = group.documents.size();
  ScoringState state;
  state.n_candidates = static_cast<int>(n);
  state.docs.resize(n);
  for (auto& doc : state.docs) doc.partial_score = ens.base_score;

  std::size_t s = static_cast<std::size_t>(sentinel.s);
  if (backend == ScoreBackend::DocumentMajor) {
    for (std::size_t d = 0; d < n; ++d) {
      double acc = state.docs[d].partial_score;
      for (std::size_t t = 0; t < s; ++t) {
        acc += eval_tree(ens.trees[t], group.documents[d].features);
      }
      state.docs[d].partial_score = acc;
    }
  } else {
    for (std::size_t t = 0; t < s; ++t) {
      const Tree& tree = ens.trees[t];
      for (std::size_t d = 0; d < n; ++d) {
        state.docs[d].partial_score +=
            eval_tree(tree, group.documents[d].features);
      }
    }
  }

  cost.ranker_trees += static_cast<std::uint64_t>(n) * s;
  assign_ranks(state);
  return state;
}

void resume_scoring(const Ensemble& ens, const QueryGroup& group,
                    ScoringState& state, SentinelConfig sentinel,
                    TraversalCost& cost) {
  check_sentinel(ens, sentinel);
  if (state.docs.size() != group.documents.size()) {
    throw std::invalid_argument("scoring state does not match query group");
  }
  std::size_t s = static_cast<std::size_t>(sentinel.s);
  std::size_t t_total = static_cast<std::size_t>(ens.num_trees());
  for (std::size_t d = 0; d < state.docs.size(); ++d) {
    if (!state.docs[d].continued.has_value()) {
      throw std::invalid_argument("decision missing for doc_index " +
                                  std::to_string(d));
    }
  }
  for (std::size_t d = 0; d < state.docs.size(); ++d) {
    if (!*state.docs[d].continued) continue;
    double acc = state.docs[d].partial_score;
    for (std::size_t t = s; t < t_total; ++t) {
      acc += eval_tree(ens.trees[t], group.documents[d].features);
    }
    state.docs[d].full_score = acc;
    cost.ranker_trees += static_cast<std::uint64_t>(t_total - s);
  }
}

bool backend_equivalence(const Ensemble& ens, const QueryGroup& group,
                         SentinelConfig sentinel) {
  TraversalCost scratch_a, scratch_b;
  ScoringState a =
      score_prefix(ens, group, sentinel, scratch_a, ScoreBackend::DocumentMajor);
  ScoringState b =
      score_prefix(ens, group, sentinel, scratch_b, ScoreBackend::TreeMajor);
  for (std::size_t d = 0; d < a.docs.size(); ++d) {
    if (a.docs[d].partial_score != b.docs[d].partial_score) return false;
    if (a.docs[d].sentinel_rank != b.docs[d].sentinel_rank) return false;
  }
  return true;
}

std::vector<int> full_ranking(const Ensemble& ens, const QueryGroup& group) {
  std::vector<double> scores(group.documents.size());
  for (std::size_t d = 0; d < scores.size(); ++d) {
    scores[d] = score_full(ens, group.documents[d].features);
  }
  return rank_descending(scores);
}

}  // namespace exitrank
