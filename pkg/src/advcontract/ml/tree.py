"""CART trees, bagged forests and gradient-boosted trees.

A tree is stored as flat arrays: `feature` (-1 at leaves), `threshold`,
`left`, `right`, `value`. Samples with x[feature] <= threshold go left.

Both tree flavours share one greedy builder. A node criterion maps the
per-child sufficient statistics to a score; the split gain is
score(left) + score(right) - score(parent).
"""

from __future__ import annotations

import numpy as np

from advcontract.ml.base import Classifier, as_xy, require_two_classes, sigmoid

_EPS = 1e-12
# Gini trees accept zero-gain splits on impure nodes (XOR-like roots have none better)
ZERO_GAIN_OK = -1e-12


class Tree:
    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            idx = np.nonzero(inner)[0]
            go_left = X[idx, f[idx]] <= self.threshold[node[idx]]
            node[idx] = np.where(go_left, self.left[node[idx]], self.right[node[idx]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def arrays(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {
            prefix + "feature": self.feature,
            prefix + "threshold": self.threshold,
            prefix + "left": self.left,
            prefix + "right": self.right,
            prefix + "value": self.value,
        }

    @classmethod
    def from_arrays(cls, a: dict[str, np.ndarray], prefix: str = "") -> "Tree":
        return cls(*(a[prefix + k] for k in ("feature", "threshold", "left", "right", "value")))


class GiniCriterion:
    """Stats per sample: [1, y]. Score = -(weighted Gini impurity) = -2·pos·neg/n."""

    def __init__(self, y: np.ndarray):
        self.stats = np.stack([np.ones(len(y)), y.astype(np.float64)], axis=1)

    @staticmethod
    def score(s: np.ndarray) -> np.ndarray:
        n, pos = s[..., 0], s[..., 1]
        return -2.0 * pos * (n - pos) / np.maximum(n, _EPS)

    @staticmethod
    def leaf(s: np.ndarray) -> float:
        return float(s[1] / s[0])

    @staticmethod
    def pure(s: np.ndarray) -> bool:
        return s[1] == 0 or s[1] == s[0]

    @staticmethod
    def child_ok(s: np.ndarray, min_leaf: float) -> np.ndarray:
        return s[..., 0] >= min_leaf


class NewtonCriterion:
    """Stats per sample: [1, g, h]. Score = G²/(H+λ); leaf weight -G/(H+λ)."""

    def __init__(self, g: np.ndarray, h: np.ndarray, lam: float, min_child_weight: float):
        self.stats = np.stack([np.ones(len(g)), g, h], axis=1)
        self.lam, self.mcw = lam, min_child_weight

    def score(self, s: np.ndarray) -> np.ndarray:
        return s[..., 1] ** 2 / (s[..., 2] + self.lam)

    def leaf(self, s: np.ndarray) -> float:
        return float(-s[1] / (s[2] + self.lam))

    @staticmethod
    def pure(s: np.ndarray) -> bool:
        return False

    def child_ok(self, s: np.ndarray, min_leaf: float) -> np.ndarray:
        return (s[..., 0] >= min_leaf) & (s[..., 2] >= self.mcw)


def build_tree(
    X: np.ndarray,
    crit,
    max_depth: int,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    min_gain: float = 1e-12,
) -> Tree:
    n, d = X.shape
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node() -> int:
        for arr, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (value, 0.0)):
            arr.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        total = crit.stats[idx].sum(axis=0)
        value[node] = crit.leaf(total)
        if depth >= max_depth or len(idx) < 2 * min_samples_leaf or crit.pure(total):
            continue
        feats = np.arange(d)
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        parent_score = crit.score(total)
        best = (min_gain, -1, 0.0, None)
        for f in feats:
            order = idx[np.argsort(X[idx, f], kind="stable")]
            xs = X[order, f]
            cum = np.cumsum(crit.stats[order], axis=0)[:-1]  # left stats for split after position i
            rest = total - cum
            cut = xs[1:] > xs[:-1]  # only between distinct values
            ok = cut & crit.child_ok(cum, min_samples_leaf) & crit.child_ok(rest, min_samples_leaf)
            if not ok.any():
                continue
            gain = np.where(ok, crit.score(cum) + crit.score(rest) - parent_score, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best[0]:
                thr = 0.5 * (xs[i] + xs[i + 1])
                best = (float(gain[i]), int(f), float(thr), order)
        if best[1] < 0:
            continue
        _, f, thr, order = best
        mask = X[order, f] <= thr
        feature[node], threshold[node] = f, thr
        l, r = new_node(), new_node()
        left[node], right[node] = l, r
        # push right first so the left subtree gets lower node ids
        stack.append((r, np.sort(order[~mask]), depth + 1))
        stack.append((l, np.sort(order[mask]), depth + 1))
    return Tree(feature, threshold, left, right, value)


class DecisionTree(Classifier):
    kind = "DT"

    def __init__(self, max_depth: int = 6, min_samples_leaf: int = 1, max_features: int | None = None, seed: int = 0):
        self.max_depth, self.min_samples_leaf = max_depth, min_samples_leaf
        self.max_features, self.seed = max_features, seed
        self.tree: Tree | None = None

    def fit(self, X, y, rng: np.random.Generator | None = None) -> "DecisionTree":
        X, y = as_xy(X, y)
        require_two_classes(y)
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        self.tree = build_tree(X, GiniCriterion(y), self.max_depth, self.min_samples_leaf, self.max_features, rng,
                               ZERO_GAIN_OK)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        return self.tree.predict(X)

    def get_state(self):
        cfg = {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
               "max_features": self.max_features, "seed": self.seed}
        return cfg, self.tree.arrays()

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(**config)
        m.tree = Tree.from_arrays(arrays)
        return m


class RandomForest(Classifier):
    """Bagged Gini trees with per-node feature subsampling; proba = mean leaf frequency."""

    kind = "RF"

    def __init__(self, n_trees: int = 50, max_depth: int = 8, min_samples_leaf: int = 1,
                 max_features: int | str | None = "sqrt", bootstrap: bool = True, seed: int = 0):
        self.n_trees, self.max_depth, self.min_samples_leaf = n_trees, max_depth, min_samples_leaf
        self.max_features, self.bootstrap, self.seed = max_features, bootstrap, seed
        self.trees: list[Tree] = []

    def _n_features(self, d: int) -> int | None:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(d)))
        return self.max_features

    def fit(self, X, y) -> "RandomForest":
        X, y = as_xy(X, y)
        require_two_classes(y)
        rng = np.random.default_rng(self.seed)
        mf = self._n_features(X.shape[1])
        self.trees = []
        for _ in range(self.n_trees):
            rows = rng.integers(0, len(y), len(y)) if self.bootstrap else np.arange(len(y))
            yb = y[rows]
            crit = GiniCriterion(yb)
            self.trees.append(build_tree(X[rows], crit, self.max_depth, self.min_samples_leaf, mf, rng, ZERO_GAIN_OK))
        return self

    def predict_proba(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def get_state(self):
        cfg = {"n_trees": self.n_trees, "max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
               "max_features": self.max_features, "bootstrap": self.bootstrap, "seed": self.seed}
        arrays = {}
        for i, t in enumerate(self.trees):
            arrays.update(t.arrays(f"t{i}."))
        return cfg, arrays

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(**config)
        m.trees = [Tree.from_arrays(arrays, f"t{i}.") for i in range(m.n_trees)]
        return m


class GradientBoostedTrees(Classifier):
    """Stagewise logistic-loss boosting with second-order (G/H) split gain and shrinkage."""

    kind = "GBT"

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1, max_depth: int = 3,
                 lam: float = 1.0, min_child_weight: float = 1e-3, min_samples_leaf: int = 1, seed: int = 0):
        self.n_rounds, self.learning_rate, self.max_depth = n_rounds, learning_rate, max_depth
        self.lam, self.min_child_weight, self.min_samples_leaf = lam, min_child_weight, min_samples_leaf
        self.seed = seed
        self.base_score = 0.0
        self.trees: list[Tree] = []

    def fit(self, X, y) -> "GradientBoostedTrees":
        X, y = as_xy(X, y)
        require_two_classes(y)
        p0 = y.mean()
        self.base_score = float(np.log(p0 / (1 - p0)))
        F = np.full(len(y), self.base_score)
        self.trees = []
        for _ in range(self.n_rounds):
            p = sigmoid(F)
            g, h = p - y, p * (1 - p)
            crit = NewtonCriterion(g, h, self.lam, self.min_child_weight)
            t = build_tree(X, crit, self.max_depth, self.min_samples_leaf)
            self.trees.append(t)
            F = F + self.learning_rate * t.predict(X)
        return self

    def decision_function(self, X) -> np.ndarray:
        X, _ = as_xy(X)
        F = np.full(len(X), self.base_score)
        for t in self.trees:
            F = F + self.learning_rate * t.predict(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def get_state(self):
        cfg = {"n_rounds": self.n_rounds, "learning_rate": self.learning_rate, "max_depth": self.max_depth,
               "lam": self.lam, "min_child_weight": self.min_child_weight,
               "min_samples_leaf": self.min_samples_leaf, "seed": self.seed}
        arrays = {"base_score": np.array([self.base_score])}
        for i, t in enumerate(self.trees):
            arrays.update(t.arrays(f"t{i}."))
        return cfg, arrays

    @classmethod
    def from_state(cls, config, arrays):
        m = cls(**config)
        m.base_score = float(arrays["base_score"][0])
        m.trees = [Tree.from_arrays(arrays, f"t{i}.") for i in range(m.n_rounds)]
        return m
