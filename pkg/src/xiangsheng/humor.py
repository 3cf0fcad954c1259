"""Humor classifier: turn-level features and a random forest over them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DataError, FormatError
from .lexicons import Lexicons, cosine, is_homophone, same_rhyme

FEATURE_NAMES = (
    "min_dist_response", "max_dist_response",
    "min_dist_turn", "max_dist_turn",
    "antonyms_response", "antonyms_turn",
    "synonyms_response", "synonyms_turn",
    "polarity_response", "polarity_turn",
    "homophones_response", "homophones_turn",
    "rhymes_response", "rhymes_turn",
    "slang_response",
)
N_FEATURES = len(FEATURE_NAMES)

HUMOROUS = 1
NOT_HUMOROUS = 0
LABELS = {"humorous": HUMOROUS, "not_humorous": NOT_HUMOROUS, "1": HUMOROUS, "0": NOT_HUMOROUS}


def _distance_range(tokens, embeddings) -> tuple[float, float]:
    vecs = [embeddings.get(w) for w in tokens]
    vecs = [v for v in vecs if v is not None]
    if len(vecs) < 2:
        return 0.0, 0.0
    dists = [1.0 - cosine(u, v) for u, v in combinations(vecs, 2)]
    return min(dists), max(dists)


def _count_pairs(tokens, predicate) -> int:
    return sum(1 for a, b in combinations(tokens, 2) if predicate(a, b))


def extract_features(input_utt: Sequence[str], response: Sequence[str],
                     lexicons: Lexicons) -> np.ndarray:
    """Feature vector in ``FEATURE_NAMES`` order.

    Pair counts run over unordered pairs of distinct positions; the "turn"
    variants use ``input_utt + response``.  All features are invariant under
    reordering of either token sequence.
    """
    response = list(response)
    turn = list(input_utt) + response
    emb = lexicons.embeddings
    pin = lexicons.pinyin
    feats = []
    feats += _distance_range(response, emb)
    feats += _distance_range(turn, emb)
    for lex in (lexicons.antonyms, lexicons.synonyms):
        feats.append(_count_pairs(response, lex.contains))
        feats.append(_count_pairs(turn, lex.contains))
    feats.append(math.fsum(lexicons.sentiment.get(w, 0.0) for w in response))
    feats.append(math.fsum(lexicons.sentiment.get(w, 0.0) for w in turn))
    homophone = lambda a, b: is_homophone(a, b, pin)  # noqa: E731
    rhyme = lambda a, b: same_rhyme(a, b, pin)  # noqa: E731
    feats.append(_count_pairs(response, homophone))
    feats.append(_count_pairs(turn, homophone))
    feats.append(_count_pairs(response, rhyme))
    feats.append(_count_pairs(turn, rhyme))
    feats.append(sum(1 for w in response if w in lexicons.slang))
    return np.array(feats, dtype=float)


def rebalance(X, y, seed: int = 0):
    """Replicate the minority class and down-sample the majority to equal size.

    Returns ``(X, y)`` unchanged when the class ratio is already within
    [0.8, 1.25].  Every minority example appears at least once in the output.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    classes, sizes = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise DataError("rebalancing needs examples from both classes")
    if 0.8 <= sizes[0] / sizes[1] <= 1.25:
        return X, y
    minor = classes[np.argmin(sizes)]
    major = classes[np.argmax(sizes)]
    minor_idx = np.flatnonzero(y == minor)
    major_idx = np.flatnonzero(y == major)
    target = int(round(math.sqrt(len(minor_idx) * len(major_idx))))
    rng = np.random.default_rng(seed)
    reps, extra = divmod(target, len(minor_idx))
    new_minor = np.concatenate([np.tile(minor_idx, reps),
                                rng.choice(minor_idx, size=extra, replace=False)])
    new_major = rng.choice(major_idx, size=target, replace=False)
    idx = np.sort(np.concatenate([new_minor, new_major]), kind="stable")
    return X[idx], y[idx]


def gini(y) -> float:
    """Gini impurity of a 0/1 label array."""
    n = len(y)
    if n == 0:
        return 0.0
    p = np.count_nonzero(y) / n
    return 2.0 * p * (1.0 - p)


@dataclass
class DecisionTree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf.

    ``value[i]`` is the fraction of humorous training samples at node i.
    Samples with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def leaf_of(self, x) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        nodes = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        while True:
            f = self.feature[nodes]
            inner = f >= 0
            if not inner.any():
                break
            r, n, f = rows[inner], nodes[inner], f[inner]
            go_left = X[r, f] <= self.threshold[n]
            nodes[inner] = np.where(go_left, self.left[n], self.right[n])
        return self.value[nodes]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def _best_split(X, y, features):
    """Best (feature, threshold, weighted child gini) among ``features``, or None."""
    n = len(y)
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        # candidate cut after position i (left = first i+1 samples)
        cut = np.flatnonzero(xs[1:] > xs[:-1])
        if len(cut) == 0:
            continue
        pos_left = np.cumsum(ys)[cut]
        n_left = cut + 1
        n_right = n - n_left
        pos_right = ys.sum() - pos_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        score = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
        k = int(np.argmin(score))
        if best is None or score[k] < best[2] - 1e-15:
            threshold = 0.5 * (xs[cut[k]] + xs[cut[k] + 1])
            best = (int(f), float(threshold), float(score[k]))
    return best


def build_tree(X, y, rng: np.random.Generator, max_depth: int = 12,
               max_features: int | None = None) -> DecisionTree:
    n_total = X.shape[1]
    m = max_features or math.ceil(math.sqrt(n_total))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(np.mean(y[idx])))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        if depth >= max_depth or len(idx) < 2 or ys.min() == ys.max():
            continue
        candidates = np.sort(rng.choice(n_total, size=min(m, n_total), replace=False))
        split = _best_split(X[idx], ys, candidates)
        if split is None:
            continue
        f, t, _ = split
        go_left = X[idx, f] <= t
        feature[node], threshold[node] = f, t
        li, ri = idx[go_left], idx[~go_left]
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return DecisionTree(np.array(feature), np.array(threshold), np.array(left),
                        np.array(right), np.array(value))


@dataclass
class HumorForest:
    trees: list[DecisionTree]
    seed: int = 0
    n_features: int = N_FEATURES

    def predict_proba(self, X) -> np.ndarray:
        """Mean leaf fraction of the humorous class across trees (soft vote)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# humor-forest v1 trees={len(self.trees)} features={self.n_features} "
                     f"seed={self.seed}\n")
            fh.write("tree\tnode\tfeature\tthreshold\tleft\tright\tp_not\tp_hum\n")
            for k, t in enumerate(self.trees):
                for i in range(t.n_nodes):
                    v = float(t.value[i])
                    fh.write(f"{k}\t{i}\t{t.feature[i]}\t{float(t.threshold[i])!r}\t"
                             f"{t.left[i]}\t{t.right[i]}\t{1.0 - v!r}\t{v!r}\n")

    @classmethod
    def load(cls, path) -> "HumorForest":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if header[:3] != ["#", "humor-forest", "v1"]:
                raise FormatError("not a v1 humor-forest file", path, 1)
            meta = dict(h.split("=", 1) for h in header[3:])
            fh.readline()
            rows: dict[int, list] = {}
            for lineno, line in enumerate(fh, 3):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 8:
                    raise FormatError("expected 8 tab-separated columns", path, lineno)
                rows.setdefault(int(parts[0]), []).append(parts)
        trees = []
        for k in sorted(rows):
            r = rows[k]
            trees.append(DecisionTree(
                np.array([int(p[2]) for p in r]), np.array([float(p[3]) for p in r]),
                np.array([int(p[4]) for p in r]), np.array([int(p[5]) for p in r]),
                np.array([float(p[7]) for p in r])))
        if len(trees) != int(meta["trees"]):
            raise FormatError("tree count does not match header", path, 1)
        return cls(trees, int(meta.get("seed", 0)), int(meta.get("features", N_FEATURES)))


def train_forest(X, y, trees: int = 100, max_depth: int = 12, seed: int = 0) -> HumorForest:
    """Bagged Gini trees with ceil(sqrt(F)) candidate features per node."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one row per label")
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise DataError("forest training needs at least two examples of both classes")
    if trees < 1:
        raise DataError("need at least one tree")
    seeds = np.random.SeedSequence(seed).spawn(trees)
    forest = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, len(y), size=len(y))
        forest.append(build_tree(X[boot], y[boot], rng, max_depth))
    return HumorForest(forest, seed, X.shape[1])


def humor_prob(forest: HumorForest, features) -> float:
    return float(forest.predict_proba(features)[0])


class HumorScorer:
    """p_hm(input, response) with feature extraction and caching."""

    def __init__(self, forest: HumorForest, lexicons: Lexicons):
        self.forest = forest
        self.lexicons = lexicons
        self._cache = {}

    def __call__(self, input_utt: Sequence[str], response: Sequence[str]) -> float:
        key = (tuple(input_utt), tuple(response))
        if key not in self._cache:
            feats = extract_features(input_utt, response, self.lexicons)
            self._cache[key] = humor_prob(self.forest, feats)
        return self._cache[key]


# --- labeled data -------------------------------------------------------------

def read_labeled(path, lexicons: Lexicons | None = None):
    """Read ``label<TAB>f1..fF`` rows or ``label<TAB>input<TAB>response`` rows.

    Raw rows are featurized with ``lexicons`` on load.  Returns ``(X, y)``.
    """
    X, y = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if parts[0] not in LABELS:
                raise FormatError(f"unknown label {parts[0]!r}", path, lineno)
            y.append(LABELS[parts[0]])
            if len(parts) == 3:
                X.append(extract_features(parts[1].split(), parts[2].split(),
                                          lexicons or Lexicons()))
            elif len(parts) == N_FEATURES + 1:
                try:
                    X.append(np.array([float(v) for v in parts[1:]]))
                except ValueError:
                    raise FormatError("non-numeric feature", path, lineno) from None
            else:
                raise FormatError("expected 3 or %d columns" % (N_FEATURES + 1), path, lineno)
    if not X:
        return np.zeros((0, N_FEATURES)), np.zeros(0, dtype=int)
    return np.vstack(X), np.array(y, dtype=int)


def write_features(X, y, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# label\t" + "\t".join(FEATURE_NAMES)
                 + "\t(distance features are 0 when fewer than two tokens have vectors)\n")
        for row, label in zip(X, y):
            name = "humorous" if label == HUMOROUS else "not_humorous"
            fh.write(name + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
