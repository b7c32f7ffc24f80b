#!/usr/bin/env python3
"""Regenerate the LightGBM-format parser fixtures.

Builds a small random forest, writes it in the LightGBM text dump layout,
and evaluates 100 random input vectors by interpreting the dump semantics
directly (value <= threshold routes left, child -(i+1) denotes leaf i).
The C++ parser must reproduce these outputs; the evaluator here is kept
independent of the C++ code on purpose.

Usage: python3 scripts/make_lightgbm_fixture.py [output_dir]
"""

import os
import random
import sys

SEED = 20240817
NUM_FEATURES = 8
NUM_VECTORS = 100
LEAF_COUNTS = [7, 4, 6, 1, 8]


class Node:
    def __init__(self, leaves, rng):
        if leaves == 1:
            self.leaf = True
            self.value = round(rng.uniform(-1.0, 1.0), 6)
            return
        self.leaf = False
        self.feature = rng.randrange(NUM_FEATURES)
        self.threshold = round(rng.uniform(-3.0, 3.0), 4)
        left_leaves = rng.randint(1, leaves - 1)
        self.left = Node(left_leaves, rng)
        self.right = Node(leaves - left_leaves, rng)


class Tree:
    """Flattens a Node topology into LightGBM's parallel arrays."""

    def __init__(self, leaves, rng):
        self.num_leaves = leaves
        self.split_feature = []
        self.threshold = []
        self.left_child = []
        self.right_child = []
        self.leaf_value = []
        root = Node(leaves, rng)
        if root.leaf:
            self.leaf_value.append(root.value)
        else:
            self._flatten(root)

    def _flatten(self, node):
        index = len(self.split_feature)
        self.split_feature.append(node.feature)
        self.threshold.append(node.threshold)
        self.left_child.append(0)
        self.right_child.append(0)
        self.left_child[index] = self._child(node.left)
        self.right_child[index] = self._child(node.right)
        return index

    def _child(self, node):
        if node.leaf:
            self.leaf_value.append(node.value)
            return -len(self.leaf_value)
        return self._flatten(node)

    def evaluate(self, x):
        if not self.split_feature:
            return self.leaf_value[0]
        node = 0
        while True:
            if x[self.split_feature[node]] <= self.threshold[node]:
                node = self.left_child[node]
            else:
                node = self.right_child[node]
            if node < 0:
                return self.leaf_value[-node - 1]

    def dump(self, index, out):
        out.write(f"Tree={index}\n")
        out.write(f"num_leaves={self.num_leaves}\n")
        out.write("num_cat=0\n")
        if self.split_feature:
            n_int = len(self.split_feature)
            out.write("split_feature=" +
                      " ".join(map(str, self.split_feature)) + "\n")
            out.write("split_gain=" +
                      " ".join("1" for _ in range(n_int)) + "\n")
            out.write("threshold=" +
                      " ".join(repr(t) for t in self.threshold) + "\n")
            out.write("decision_type=" +
                      " ".join("2" for _ in range(n_int)) + "\n")
            out.write("left_child=" +
                      " ".join(map(str, self.left_child)) + "\n")
            out.write("right_child=" +
                      " ".join(map(str, self.right_child)) + "\n")
        out.write("leaf_value=" +
                  " ".join(repr(v) for v in self.leaf_value) + "\n")
        out.write("leaf_weight=" +
                  " ".join("1" for _ in self.leaf_value) + "\n")
        out.write("leaf_count=" +
                  " ".join("10" for _ in self.leaf_value) + "\n")
        if self.split_feature:
            n_int = len(self.split_feature)
            out.write("internal_value=" +
                      " ".join("0" for _ in range(n_int)) + "\n")
            out.write("internal_weight=" +
                      " ".join("1" for _ in range(n_int)) + "\n")
            out.write("internal_count=" +
                      " ".join("10" for _ in range(n_int)) + "\n")
        out.write("shrinkage=0.1\n")
        out.write("\n\n")


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "tests", "fixtures")
    rng = random.Random(SEED)
    trees = [Tree(leaves, rng) for leaves in LEAF_COUNTS]

    model_path = os.path.join(out_dir, "lightgbm_model.txt")
    with open(model_path, "w") as out:
        out.write("tree\n")
        out.write("version=v3\n")
        out.write("num_class=1\n")
        out.write("num_tree_per_iteration=1\n")
        out.write("label_index=0\n")
        out.write(f"max_feature_idx={NUM_FEATURES - 1}\n")
        out.write("objective=regression\n")
        out.write("feature_names=" +
                  " ".join(f"f{i}" for i in range(NUM_FEATURES)) + "\n")
        out.write("feature_infos=" +
                  " ".join("[-4:4]" for _ in range(NUM_FEATURES)) + "\n")
        out.write("tree_sizes=" + " ".join("1" for _ in trees) + "\n")
        out.write("\n")
        for i, tree in enumerate(trees):
            tree.dump(i, out)
        out.write("end of trees\n")
        out.write("\n")
        out.write("feature_importances:\n")
        out.write("f0=1\n")
        out.write("\n")
        out.write("parameters:\n")
        out.write("[boosting: gbdt]\n")
        out.write("[objective: regression]\n")
        out.write("\n")
        out.write("pandas_categorical:null\n")

    vectors = [[round(rng.uniform(-4.0, 4.0), 6) for _ in range(NUM_FEATURES)]
               for _ in range(NUM_VECTORS)]
    with open(os.path.join(out_dir, "lightgbm_inputs.csv"), "w") as out:
        for x in vectors:
            out.write(",".join(repr(v) for v in x) + "\n")
    with open(os.path.join(out_dir, "lightgbm_expected.csv"), "w") as out:
        for x in vectors:
            score = sum(tree.evaluate(x) for tree in trees)
            out.write(repr(score) + "\n")

    print(f"wrote {model_path} and {NUM_VECTORS} input/expected rows")


if __name__ == "__main__":
    main()
