#include "exitrank/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "exitrank/exitset.hpp"
#include "exitrank/parallel.hpp"

namespace exitrank {

int ExitDecision::continued_count() const {
  return static_cast<int>(
      std::count(continued.begin(), continued.end(), true));
}

ExitDecision apply_ert(const ScoringState& state, int k_s) {
  if (k_s < 1) throw std::invalid_argument("k_s must be >= 1");
  ExitDecision dec;
  dec.continued.resize(state.docs.size());
  for (std::size_t i = 0; i < state.docs.size(); ++i) {
    dec.continued[i] = state.docs[i].sentinel_rank <= k_s;
  }
  return dec;
}

ExitDecision apply_ept(const ScoringState& state, int k_s, double p) {
  if (k_s < 1) throw std::invalid_argument("k_s must be >= 1");
  if (p < 0.0) throw std::invalid_argument("p must be >= 0");
  if (state.docs.empty()) throw std::invalid_argument("empty scoring state");

  double sigma = state.docs[0].partial_score;
  if (state.docs.size() < static_cast<std::size_t>(k_s)) {
    for (const DocState& d : state.docs) {
      sigma = std::min(sigma, d.partial_score);
    }
  } else {
    for (const DocState& d : state.docs) {
      if (d.sentinel_rank == k_s) {
        sigma = d.partial_score;
        break;
      }
    }
  }

  ExitDecision dec;
  dec.continued.resize(state.docs.size());
  for (std::size_t i = 0; i < state.docs.size(); ++i) {
    dec.continued[i] = state.docs[i].partial_score >= sigma - p;
  }
  return dec;
}

ExitDecision apply_lear(const ScoringState& state, const QueryGroup& group,
                        const Forest& classifier, double tau,
                        TraversalCost& cost) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must be in (0, 1)");
  }
  if (group.documents.size() != state.docs.size()) {
    throw std::invalid_argument("group and scoring state sizes differ");
  }
  ExitDecision dec;
  dec.continued.resize(state.docs.size());
  for (std::size_t i = 0; i < group.documents.size(); ++i) {
    std::vector<double> aug = augment_features(group.documents[i], state);
    if (static_cast<std::size_t>(classifier.model.num_features) !=
        aug.size()) {
      throw std::invalid_argument(
          "classifier expects " +
          std::to_string(classifier.model.num_features) +
          " features but the augmented layout has " +
          std::to_string(aug.size()));
    }
    dec.continued[i] = predict_proba(classifier, aug) >= tau;
    cost.strategy_trees += classifier.model.trees.size();
  }
  return dec;
}

ExitDecision ideal_cut(const ScoringState& state,
                       std::span<const int> full_top_k, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::size_t n = state.docs.size();

  int cut;
  if (n <= static_cast<std::size_t>(k)) {
    cut = static_cast<int>(n);
  } else {
    cut = 0;
    for (int d : full_top_k) {
      if (d < 0 || static_cast<std::size_t>(d) >= n) {
        throw std::invalid_argument("top-k references doc_index " +
                                    std::to_string(d) + " out of range");
      }
      cut = std::max(cut, state.docs[static_cast<std::size_t>(d)].sentinel_rank);
    }
  }

  ExitDecision dec;
  dec.ideal_cut = cut;
  dec.continued.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    dec.continued[i] = state.docs[i].sentinel_rank <= cut;
  }
  return dec;
}

void set_decisions(ScoringState& state, const ExitDecision& decision) {
  if (decision.continued.size() != state.docs.size()) {
    throw std::invalid_argument("decision and scoring state sizes differ");
  }
  for (std::size_t i = 0; i < state.docs.size(); ++i) {
    state.docs[i].continued = decision.continued[i];
  }
}

std::vector<int> assemble_ranking(const ScoringState& state,
                                  bool merge_by_score) {
  std::size_t n = state.docs.size();
  std::vector<double> effective(n);
  std::vector<bool> continued(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DocState& d = state.docs[i];
    if (!d.continued.has_value()) {
      throw std::invalid_argument("decision missing for doc_index " +
                                  std::to_string(i));
    }
    continued[i] = *d.continued;
    if (continued[i]) {
      if (!d.full_score.has_value()) {
        throw std::invalid_argument("full score missing for doc_index " +
                                    std::to_string(i));
      }
      effective[i] = *d.full_score;
    } else {
      effective[i] = d.partial_score;
    }
  }

  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (!merge_by_score) {
      // Continued documents form the upper segment.
      bool ca = continued[static_cast<std::size_t>(a)];
      bool cb = continued[static_cast<std::size_t>(b)];
      if (ca != cb) return ca;
    }
    double sa = effective[static_cast<std::size_t>(a)];
    double sb = effective[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

namespace {

void check_params(const StrategyParams& params) {
  if (const auto* ert = std::get_if<ErtParams>(&params)) {
    if (ert->k_s < 1) throw std::invalid_argument("k_s must be >= 1");
  } else if (const auto* ept = std::get_if<EptParams>(&params)) {
    if (ept->k_s < 1) throw std::invalid_argument("k_s must be >= 1");
    if (ept->p < 0.0) throw std::invalid_argument("p must be >= 0");
  } else if (const auto* lear = std::get_if<LearParams>(&params)) {
    if (!lear->classifier) {
      throw std::invalid_argument("LEAR strategy requires a classifier");
    }
    if (!(lear->tau > 0.0 && lear->tau < 1.0)) {
      throw std::invalid_argument("tau must be in (0, 1)");
    }
  } else if (const auto* ideal = std::get_if<IdealParams>(&params)) {
    if (ideal->k < 1) throw std::invalid_argument("k must be >= 1");
  }
}

ExitDecision decide(const Ensemble& ens, const QueryGroup& group,
                    const ScoringState& state, const StrategyParams& params,
                    TraversalCost& cost) {
  if (std::holds_alternative<FullParams>(params)) {
    ExitDecision dec;
    dec.continued.assign(state.docs.size(), true);
    return dec;
  }
  if (const auto* ideal = std::get_if<IdealParams>(&params)) {
    // The oracle consults full scores for free; only the decision itself
    // is charged through resume_scoring.
    std::vector<int> ranking = full_ranking(ens, group);
    std::size_t top =
        std::min(ranking.size(), static_cast<std::size_t>(ideal->k));
    return ideal_cut(state, std::span<const int>(ranking.data(), top),
                     ideal->k);
  }
  if (const auto* ert = std::get_if<ErtParams>(&params)) {
    return apply_ert(state, ert->k_s);
  }
  if (const auto* ept = std::get_if<EptParams>(&params)) {
    return apply_ept(state, ept->k_s, ept->p);
  }
  const auto& lear = std::get<LearParams>(params);
  return apply_lear(state, group, *lear.classifier, lear.tau, cost);
}

}  // namespace

std::vector<int> PipelineResult::continued_counts() const {
  std::vector<int> counts;
  counts.reserve(queries.size());
  for (const QueryOutcome& q : queries) {
    counts.push_back(q.decision.continued_count());
  }
  return counts;
}

PipelineResult run_pipeline(const Ensemble& ens, const Dataset& ds,
                            SentinelConfig sentinel,
                            const StrategyParams& params,
                            const PipelineOptions& opts) {
  check_params(params);

  std::vector<QueryOutcome> outcomes(ds.groups.size());
  std::vector<TraversalCost> costs(ds.groups.size());

  auto started = std::chrono::steady_clock::now();
  parallel_for(ds.groups.size(), opts.threads, [&](std::size_t gi) {
    const QueryGroup& group = ds.groups[gi];
    TraversalCost local;
    ScoringState state =
        score_prefix(ens, group, sentinel, local, opts.backend);

    ExitDecision dec;
    if (opts.measure_strategy_overhead) {
      auto t0 = std::chrono::steady_clock::now();
      dec = decide(ens, group, state, params, local);
      auto t1 = std::chrono::steady_clock::now();
      local.strategy_overhead_ns = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
              .count());
    } else {
      dec = decide(ens, group, state, params, local);
    }

    set_decisions(state, dec);
    resume_scoring(ens, group, state, sentinel, local);
    outcomes[gi].ranking = assemble_ranking(state, opts.merge_by_score);
    outcomes[gi].decision = std::move(dec);
    costs[gi] = local;
  });
  auto finished = std::chrono::steady_clock::now();

  PipelineResult result;
  result.queries = std::move(outcomes);
  for (const TraversalCost& c : costs) result.cost += c;
  result.cost.wall_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(finished - started)
          .count());
  return result;
}

TraversalCost full_scoring_cost(const Ensemble& ens, const Dataset& ds) {
  TraversalCost cost;
  cost.ranker_trees = static_cast<std::uint64_t>(ds.num_documents()) *
                      static_cast<std::uint64_t>(ens.trees.size());
  return cost;
}

}  // namespace exitrank
