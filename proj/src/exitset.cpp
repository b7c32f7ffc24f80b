#include "exitrank/exitset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "exitrank/errors.hpp"
#include "exitrank/parallel.hpp"
#include "exitrank/text.hpp"

namespace exitrank {

std::vector<ExitLabel> label_documents(std::span<const int> full_ranking,
                                       std::span<const int> relevances,
                                       int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (full_ranking.size() != relevances.size()) {
    throw std::invalid_argument("ranking and relevance lengths differ");
  }
  std::size_t n = full_ranking.size();
  std::vector<ExitLabel> labels(n, ExitLabel::Exit);
  std::size_t cutoff = std::min(n, static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < cutoff; ++r) {
    int d = full_ranking[r];
    if (d < 0 || static_cast<std::size_t>(d) >= n) {
      throw std::invalid_argument("ranking references doc_index " +
                                  std::to_string(d) + " out of range");
    }
    if (relevances[static_cast<std::size_t>(d)] >= 1) {
      labels[static_cast<std::size_t>(d)] = ExitLabel::Continue;
    }
  }
  return labels;
}

std::vector<double> augment_features(const Document& doc,
                                     const ScoringState& state) {
  if (doc.doc_index < 0 ||
      static_cast<std::size_t>(doc.doc_index) >= state.docs.size()) {
    throw std::invalid_argument("doc_index " + std::to_string(doc.doc_index) +
                                " not present in scoring state");
  }
  const DocState& ds = state.docs[static_cast<std::size_t>(doc.doc_index)];

  double lo = state.docs[0].partial_score;
  double hi = lo;
  for (const DocState& d : state.docs) {
    lo = std::min(lo, d.partial_score);
    hi = std::max(hi, d.partial_score);
  }
  double minmax = hi == lo ? 0.5 : (ds.partial_score - lo) / (hi - lo);

  std::vector<double> out;
  out.reserve(doc.features.size() + kNumSentinelFeatures);
  out.insert(out.end(), doc.features.begin(), doc.features.end());
  out.push_back(ds.partial_score);
  out.push_back(minmax);
  out.push_back(static_cast<double>(ds.sentinel_rank));
  out.push_back(static_cast<double>(state.n_candidates));
  return out;
}

double compute_weight(int relevance, ExitLabel label, int n_continue,
                      int n_exit) {
  if (relevance < 0) throw std::invalid_argument("relevance must be >= 0");
  if (n_continue < 0 || n_exit < 0 || n_continue + n_exit < 1) {
    throw std::invalid_argument("invalid label counts");
  }
  int own = label == ExitLabel::Continue ? n_continue : n_exit;
  if (own < 1) {
    throw std::invalid_argument("own-label count must be >= 1");
  }
  double f = static_cast<double>(own) /
             static_cast<double>(n_continue + n_exit);
  return std::ldexp(1.0, relevance) / f;
}

std::vector<ExitExample> build_exit_training_set(const Ensemble& ens,
                                                 const Dataset& ds,
                                                 SentinelConfig sentinel,
                                                 int k_label, int threads) {
  if (k_label < 1) throw std::invalid_argument("k must be >= 1");

  std::vector<std::vector<ExitExample>> per_group(ds.groups.size());
  parallel_for(ds.groups.size(), threads, [&](std::size_t gi) {
    const QueryGroup& group = ds.groups[gi];
    std::size_t n = group.documents.size();

    std::vector<int> ranking = full_ranking(ens, group);
    std::vector<int> rels(n);
    for (std::size_t i = 0; i < n; ++i) rels[i] = group.documents[i].relevance;
    std::vector<ExitLabel> labels = label_documents(ranking, rels, k_label);

    TraversalCost scratch;
    ScoringState state = score_prefix(ens, group, sentinel, scratch);

    int n_continue = static_cast<int>(
        std::count(labels.begin(), labels.end(), ExitLabel::Continue));
    int n_exit = static_cast<int>(n) - n_continue;

    std::vector<ExitExample>& out = per_group[gi];
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ExitExample& ex = out[i];
      ex.features = augment_features(group.documents[i], state);
      ex.label = labels[i];
      ex.weight = compute_weight(rels[i], labels[i], n_continue, n_exit);
      ex.query_id = group.query_id;
      ex.doc_index = group.documents[i].doc_index;
    }
  });

  std::vector<std::size_t> order(per_group.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.groups[a].query_id < ds.groups[b].query_id;
  });

  std::vector<ExitExample> all;
  all.reserve(ds.num_documents());
  for (std::size_t gi : order) {
    for (ExitExample& ex : per_group[gi]) all.push_back(std::move(ex));
  }
  return all;
}

void write_exit_training_set(std::span<const ExitExample> examples,
                             int num_features, const std::string& letor_path,
                             const std::string& weights_path) {
  std::size_t width =
      static_cast<std::size_t>(num_features) + kNumSentinelFeatures;
  for (const ExitExample& ex : examples) {
    if (ex.features.size() != width) {
      throw std::invalid_argument(
          "example feature length does not match num_features + 4");
    }
  }

  std::ofstream letor(letor_path, std::ios::binary);
  if (!letor) throw DataError("cannot open output file: " + letor_path);
  std::ofstream weights(weights_path, std::ios::binary);
  if (!weights) throw DataError("cannot open output file: " + weights_path);

  for (const ExitExample& ex : examples) {
    letor << static_cast<int>(ex.label) << " qid:" << ex.query_id;
    for (std::size_t j = 0; j < ex.features.size(); ++j) {
      letor << ' ' << (j + 1) << ':' << fmt_double(ex.features[j]);
    }
    letor << '\n';
    weights << fmt_double(ex.weight) << '\n';
  }
}

}  // namespace exitrank
