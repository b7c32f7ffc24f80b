#ifndef EXITRANK_ENSEMBLE_HPP
#define EXITRANK_ENSEMBLE_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exitrank {

/// Binary regression tree stored as parallel arrays over internal nodes.
/// Child references: >= 0 is an internal node index, a negative value -(i+1)
/// is leaf i. Node 0 is the root; a tree with no internal nodes is the
/// single constant leaf leaf_value[0].
struct Tree {
  std::vector<int> split_feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> leaf_value;

  int num_internal() const { return static_cast<int>(split_feature.size()); }
  int num_leaves() const { return static_cast<int>(leaf_value.size()); }
};

/// Additive ensemble. Tree order is the boosting order and is significant:
/// sentinels cut prefixes of it.
struct Ensemble {
  std::vector<Tree> trees;
  int num_features = 0;
  double base_score = 0.0;  // added once per document

  int num_trees() const { return static_cast<int>(trees.size()); }
};

inline constexpr int kDefaultMaxLeaves = 64;

/// Routes left when feature value <= threshold. Rejects NaN feature values.
double eval_tree(const Tree& tree, std::span<const double> features);

/// base_score + sum of all tree outputs. Throws on feature arity mismatch.
double score_full(const Ensemble& ens, std::span<const double> features);

/// Structural checks: at least one tree, consistent array lengths, exactly
/// one root with every node reachable exactly once, leaf budget, feature
/// indices in range. Throws DataError.
void validate_ensemble(const Ensemble& ens, int max_leaves = kDefaultMaxLeaves);

/// Parses the text dump produced by LightGBM (Tree= blocks with num_leaves,
/// split_feature, threshold, left_child, right_child, leaf_value). Only
/// numeric `<=` splits are supported; categorical splits are rejected.
Ensemble parse_lightgbm_text(std::string_view text,
                             int max_leaves = kDefaultMaxLeaves);

/// Native model format: a self-describing JSON document with the same
/// negative-child leaf encoding. load(save(e)) scores identically to e.
std::string save_native(const Ensemble& ens);
Ensemble load_native(std::string_view text, int max_leaves = kDefaultMaxLeaves);

/// File helpers. load_model_file sniffs the format: JSON documents are
/// native models, anything else is treated as a LightGBM text dump.
void save_native_file(const Ensemble& ens, const std::string& path);
Ensemble load_native_file(const std::string& path,
                          int max_leaves = kDefaultMaxLeaves);
Ensemble load_lightgbm_file(const std::string& path,
                            int max_leaves = kDefaultMaxLeaves);
Ensemble load_model_file(const std::string& path,
                         int max_leaves = kDefaultMaxLeaves);

}  // namespace exitrank

#endif  // EXITRANK_ENSEMBLE_HPP
