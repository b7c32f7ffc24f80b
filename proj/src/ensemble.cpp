#include "exitrank/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "exitrank/errors.hpp"
#include "exitrank/text.hpp"
#include "native_schema.hpp"

namespace exitrank {

double eval_tree(const Tree& tree, std::span<const double> features) {
  if (tree.num_internal() == 0) return tree.leaf_value[0];
  int node = 0;
  for (;;) {
    int f = tree.split_feature[static_cast<std::size_t>(node)];
    if (f < 0 || static_cast<std::size_t>(f) >= features.size()) {
      throw std::invalid_argument("feature index " + std::to_string(f) +
                                  " out of range for vector of length " +
                                  std::to_string(features.size()));
    }
    double v = features[static_cast<std::size_t>(f)];
    if (std::isnan(v)) {
      throw DataError("NaN feature value at index " + std::to_string(f));
    }
    node = v <= tree.threshold[static_cast<std::size_t>(node)]
               ? tree.left[static_cast<std::size_t>(node)]
               : tree.right[static_cast<std::size_t>(node)];
    if (node < 0) return tree.leaf_value[static_cast<std::size_t>(-node - 1)];
  }
}

double score_full(const Ensemble& ens, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(ens.num_features)) {
    throw std::invalid_argument(
        "feature vector length " + std::to_string(features.size()) +
        " does not match model num_features " +
        std::to_string(ens.num_features));
  }
  double score = ens.base_score;
  for (const auto& tree : ens.trees) score += eval_tree(tree, features);
  return score;
}

namespace {

void validate_tree(const Tree& tree, int tree_index, int num_features,
                   int max_leaves) {
  auto fail = [tree_index](const std::string& what) {
    throw DataError("tree " + std::to_string(tree_index) + ": " + what);
  };
  std::size_t n_int = tree.split_feature.size();
  std::size_t n_leaf = tree.leaf_value.size();
  if (tree.threshold.size() != n_int || tree.left.size() != n_int ||
      tree.right.size() != n_int) {
    fail("inconsistent internal-node array lengths");
  }
  if (n_leaf != n_int + 1) {
    fail("leaf count " + std::to_string(n_leaf) + " != internal count + 1 (" +
         std::to_string(n_int + 1) + ")");
  }
  if (static_cast<int>(n_leaf) > max_leaves) {
    fail("leaf count " + std::to_string(n_leaf) + " exceeds limit " +
         std::to_string(max_leaves));
  }
  for (int f : tree.split_feature) {
    if (f < 0 || f >= num_features) {
      fail("split feature " + std::to_string(f) + " out of range");
    }
  }
  if (n_int == 0) return;

  // Walk from the root; a well-formed tree visits every node exactly once.
  std::vector<char> seen_int(n_int, 0), seen_leaf(n_leaf, 0);
  std::vector<int> stack{0};
  seen_int[0] = 1;
  std::size_t visited_int = 1, visited_leaf = 0;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int child : {tree.left[static_cast<std::size_t>(node)],
                      tree.right[static_cast<std::size_t>(node)]}) {
      if (child >= 0) {
        if (static_cast<std::size_t>(child) >= n_int) {
          fail("child reference " + std::to_string(child) + " out of range");
        }
        if (child == 0 || seen_int[static_cast<std::size_t>(child)]) {
          fail("node " + std::to_string(child) +
               " referenced more than once (not a tree)");
        }
        seen_int[static_cast<std::size_t>(child)] = 1;
        ++visited_int;
        stack.push_back(child);
      } else {
        std::size_t leaf = static_cast<std::size_t>(-child - 1);
        if (leaf >= n_leaf) {
          fail("leaf reference " + std::to_string(child) + " out of range");
        }
        if (seen_leaf[leaf]) {
          fail("leaf " + std::to_string(leaf) + " referenced more than once");
        }
        seen_leaf[leaf] = 1;
        ++visited_leaf;
      }
    }
  }
  if (visited_int != n_int || visited_leaf != n_leaf) {
    fail("unreachable nodes (visited " + std::to_string(visited_int) + "/" +
         std::to_string(n_int) + " internal, " + std::to_string(visited_leaf) +
         "/" + std::to_string(n_leaf) + " leaves)");
  }
}

}  // namespace

void validate_ensemble(const Ensemble& ens, int max_leaves) {
  if (ens.trees.empty()) throw DataError("ensemble has no trees");
  if (ens.num_features < 1) throw DataError("ensemble num_features < 1");
  for (int t = 0; t < ens.num_trees(); ++t) {
    validate_tree(ens.trees[static_cast<std::size_t>(t)], t, ens.num_features,
                  max_leaves);
  }
}

// ---------------------------------------------------------------------------
// LightGBM text dump subset
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

template <typename T, typename Parse>
std::vector<T> parse_array(std::string_view value, const Parse& parse,
                           const std::string& context) {
  std::vector<T> out;
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && value[i] == ' ') ++i;
    std::size_t b = i;
    while (i < value.size() && value[i] != ' ') ++i;
    if (i > b) {
      T item{};
      if (!parse(value.substr(b, i - b), item)) {
        throw ParseError(context + ": malformed value '" +
                         std::string(value.substr(b, i - b)) + "'");
      }
      out.push_back(item);
    }
  }
  return out;
}

std::vector<double> parse_double_array(std::string_view value,
                                       const std::string& context) {
  return parse_array<double>(
      value, [](std::string_view t, double& d) { return parse_double(t, d); },
      context);
}

std::vector<long long> parse_int_array(std::string_view value,
                                       const std::string& context) {
  return parse_array<long long>(
      value, [](std::string_view t, long long& d) { return parse_int(t, d); },
      context);
}

Tree tree_from_block(
    const std::unordered_map<std::string, std::string>& fields,
    const std::string& context) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) {
      throw ParseError(context + ": missing array '" + std::string(key) + "'");
    }
    return it->second;
  };

  long long num_leaves = 0;
  if (!parse_int(get("num_leaves"), num_leaves) || num_leaves < 1) {
    throw ParseError(context + ": bad num_leaves");
  }

  Tree tree;
  if (num_leaves == 1) {
    // Constant tree: a single leaf and no splits.
    tree.leaf_value = parse_double_array(get("leaf_value"), context);
    if (tree.leaf_value.size() != 1) {
      throw ParseError(context + ": leaf_value length != num_leaves");
    }
    return tree;
  }

  if (auto it = fields.find("num_cat"); it != fields.end()) {
    long long num_cat = 0;
    if (!parse_int(it->second, num_cat) || num_cat != 0) {
      throw ParseError(context + ": categorical splits are not supported");
    }
  }
  if (auto it = fields.find("decision_type"); it != fields.end()) {
    // Bit 0 marks a categorical split; the default-direction bits are
    // irrelevant here because NaN inputs are rejected at scoring time.
    for (long long dt : parse_int_array(it->second, context)) {
      if (dt & 1) {
        throw ParseError(context +
                         ": categorical decision_type is not supported");
      }
    }
  }

  std::size_t n_int = static_cast<std::size_t>(num_leaves - 1);
  auto features = parse_int_array(get("split_feature"), context);
  tree.threshold = parse_double_array(get("threshold"), context);
  auto left = parse_int_array(get("left_child"), context);
  auto right = parse_int_array(get("right_child"), context);
  tree.leaf_value = parse_double_array(get("leaf_value"), context);

  if (features.size() != n_int || tree.threshold.size() != n_int ||
      left.size() != n_int || right.size() != n_int ||
      tree.leaf_value.size() != static_cast<std::size_t>(num_leaves)) {
    throw ParseError(context + ": array lengths inconsistent with num_leaves");
  }
  tree.split_feature.assign(features.begin(), features.end());
  tree.left.assign(left.begin(), left.end());
  tree.right.assign(right.begin(), right.end());
  return tree;
}

}  // namespace

Ensemble parse_lightgbm_text(std::string_view text, int max_leaves) {
  Ensemble ens;
  int max_feature_idx = -1;
  int max_split_feature = -1;

  auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size()) {
    auto line = strip(lines[i]);
    if (line.starts_with("max_feature_idx=")) {
      long long v = 0;
      if (parse_int(line.substr(16), v)) max_feature_idx = static_cast<int>(v);
      ++i;
      continue;
    }
    if (!line.starts_with("Tree=")) {
      if (line == "end of trees") break;
      ++i;
      continue;
    }
    std::string context = "tree block '" + std::string(line) + "'";
    std::unordered_map<std::string, std::string> fields;
    ++i;
    while (i < lines.size()) {
      auto body = strip(lines[i]);
      if (body.empty() || body.starts_with("Tree=") ||
          body == "end of trees") {
        break;
      }
      auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        fields.emplace(std::string(body.substr(0, eq)),
                       std::string(body.substr(eq + 1)));
      }
      ++i;
    }
    Tree tree = tree_from_block(fields, context);
    for (int f : tree.split_feature) {
      if (f > max_split_feature) max_split_feature = f;
    }
    ens.trees.push_back(std::move(tree));
  }

  if (ens.trees.empty()) {
    throw ParseError("no Tree= blocks found in LightGBM text dump");
  }
  ens.num_features =
      max_feature_idx >= 0 ? max_feature_idx + 1 : max_split_feature + 1;
  if (ens.num_features < 1) ens.num_features = 1;
  ens.base_score = 0.0;  // LightGBM folds any constant into the leaves
  validate_ensemble(ens, max_leaves);
  return ens;
}

// ---------------------------------------------------------------------------
// Native JSON format
// ---------------------------------------------------------------------------

namespace detail {

nlohmann::json ensemble_to_json(const Ensemble& ens) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : ens.trees) {
    trees.push_back({{"split_feature", tree.split_feature},
                     {"threshold", tree.threshold},
                     {"left", tree.left},
                     {"right", tree.right},
                     {"leaf_value", tree.leaf_value}});
  }
  return {{"num_features", ens.num_features},
          {"base_score", ens.base_score},
          {"trees", std::move(trees)}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key,
                              const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError("native model: missing '" + path + "/" + key + "'");
  }
  return j.at(key);
}

template <typename T>
std::vector<T> number_array(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ParseError("native model: '" + path + "' must be an array");
  }
  std::vector<T> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j.at(i);
    if (!item.is_number()) {
      throw ParseError("native model: '" + path + "/" + std::to_string(i) +
                       "' must be a number");
    }
    out.push_back(item.get<T>());
  }
  return out;
}

}  // namespace

Ensemble ensemble_from_json(const nlohmann::json& j, int max_leaves) {
  Ensemble ens;
  const auto& nf = require(j, "num_features", "");
  if (!nf.is_number_integer()) {
    throw ParseError("native model: '/num_features' must be an integer");
  }
  ens.num_features = nf.get<int>();
  const auto& base = require(j, "base_score", "");
  if (!base.is_number()) {
    throw ParseError("native model: '/base_score' must be a number");
  }
  ens.base_score = base.get<double>();
  const auto& trees = require(j, "trees", "");
  if (!trees.is_array()) {
    throw ParseError("native model: '/trees' must be an array");
  }
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::string path = "/trees/" + std::to_string(t);
    const auto& jt = trees.at(t);
    Tree tree;
    tree.split_feature =
        number_array<int>(require(jt, "split_feature", path), path + "/split_feature");
    tree.threshold =
        number_array<double>(require(jt, "threshold", path), path + "/threshold");
    tree.left = number_array<int>(require(jt, "left", path), path + "/left");
    tree.right = number_array<int>(require(jt, "right", path), path + "/right");
    tree.leaf_value =
        number_array<double>(require(jt, "leaf_value", path), path + "/leaf_value");
    ens.trees.push_back(std::move(tree));
  }
  validate_ensemble(ens, max_leaves);
  return ens;
}

}  // namespace detail

std::string save_native(const Ensemble& ens) {
  return detail::ensemble_to_json(ens).dump(2) + "\n";
}

Ensemble load_native(std::string_view text, int max_leaves) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("native model: invalid JSON: ") + e.what());
  }
  return detail::ensemble_from_json(j, max_leaves);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_native_file(const Ensemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << save_native(ens);
}

Ensemble load_native_file(const std::string& path, int max_leaves) {
  return load_native(read_file(path), max_leaves);
}

Ensemble load_lightgbm_file(const std::string& path, int max_leaves) {
  return parse_lightgbm_text(read_file(path), max_leaves);
}

Ensemble load_model_file(const std::string& path, int max_leaves) {
  std::string text = read_file(path);
  std::string_view body = strip(text);
  if (!body.empty() && body.front() == '{') {
    return load_native(text, max_leaves);
  }
  return parse_lightgbm_text(text, max_leaves);
}

}  // namespace exitrank
