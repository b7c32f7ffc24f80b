#ifndef EXITRANK_EXITSET_HPP
#define EXITRANK_EXITSET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exitrank/dataset.hpp"
#include "exitrank/ensemble.hpp"
#include "exitrank/scorer.hpp"

namespace exitrank {

enum class ExitLabel : int { Exit = 0, Continue = 1 };

/// Number of sentinel-derived features appended to the raw feature vector.
/// Augmented layout, fixed: indices 0..F-1 raw features, F partial score,
/// F+1 per-query min-max normalized partial score, F+2 sentinel rank,
/// F+3 number of candidates for the query.
inline constexpr int kNumSentinelFeatures = 4;

/// One classifier training example.
struct ExitExample {
  std::vector<double> features;  // length F + kNumSentinelFeatures
  ExitLabel label = ExitLabel::Exit;
  double weight = 1.0;  // 2^relevance / label frequency within the query
  std::int64_t query_id = 0;
  int doc_index = 0;
};

/// Continue iff the document ranks within the top-k of the full-ensemble
/// ranking AND is relevant (grade >= 1); everything else is Exit.
std::vector<ExitLabel> label_documents(std::span<const int> full_ranking,
                                       std::span<const int> relevances, int k);

/// Raw features plus the four sentinel features, in the fixed layout above.
/// The min-max value degenerates to 0.5 when all partial scores are equal.
std::vector<double> augment_features(const Document& doc,
                                     const ScoringState& state);

/// w = 2^relevance / f_q where f_q is the relative frequency of the
/// document's own label among the query's candidates. The own-label count
/// must be >= 1 (the document itself carries it).
double compute_weight(int relevance, ExitLabel label, int n_continue,
                      int n_exit);

/// Full pipeline over a dataset: full rankings, labels, sentinel features,
/// and weights for every document. Output is in canonical order (ascending
/// query_id, then doc_index) regardless of the thread schedule.
std::vector<ExitExample> build_exit_training_set(const Ensemble& ens,
                                                 const Dataset& ds,
                                                 SentinelConfig sentinel,
                                                 int k_label, int threads = 1);

/// Training-set dump: LETOR lines with label in {0,1} plus a sidecar weight
/// file holding one real per line in the same order.
void write_exit_training_set(std::span<const ExitExample> examples,
                             int num_features, const std::string& letor_path,
                             const std::string& weights_path);

}  // namespace exitrank

#endif  // EXITRANK_EXITSET_HPP
