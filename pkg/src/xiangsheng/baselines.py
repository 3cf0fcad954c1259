"""Retrieval baselines (IR-UR, IR-UU, IR-CXT) and the random-response floor.

Similarity is cosine between bag-of-words vectors weighted by
tf · idf with idf = ln(1 + N / df), where documents are all pool
utterances and responses.  ``weighting="tf"`` switches idf off.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import DataError


@dataclass(frozen=True)
class Retrieval:
    tokens: tuple[str, ...]
    pair_id: int
    score: float
    no_overlap: bool = False


class RetrievalIndex:
    """Pool of (utterance, response) pairs with row-normalized term vectors.

    Pair ids are positions in the pool, so ties resolve to the pair that
    came first.
    """

    def __init__(self, pairs: Sequence, weighting: str = "tfidf"):
        if weighting not in ("tfidf", "tf"):
            raise ValueError(f"unknown weighting {weighting!r}")
        self.pairs = list(pairs)
        self.weighting = weighting
        docs = [p.source for p in self.pairs] + [p.reference for p in self.pairs]
        self.vocab = {w: i for i, w in enumerate(sorted({w for d in docs for w in d}))}
        df = np.zeros(len(self.vocab))
        for d in docs:
            for w in set(d):
                df[self.vocab[w]] += 1
        if weighting == "tfidf":
            self.idf = np.log1p(len(docs) / np.maximum(df, 1))
        else:
            self.idf = np.ones(len(self.vocab))
        self.utterances = self._matrix([p.source for p in self.pairs])
        self.responses = self._matrix([p.reference for p in self.pairs])

    def __len__(self):
        return len(self.pairs)

    def _matrix(self, docs) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for i, d in enumerate(docs):
            for w, c in Counter(d).items():
                j = self.vocab.get(w)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(c * self.idf[j])
        m = sparse.csr_matrix((vals, (rows, cols)), shape=(len(docs), len(self.vocab)))
        norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1))).ravel()
        norms[norms == 0] = 1.0
        return sparse.csr_matrix(sparse.diags(1.0 / norms) @ m)

    def vectorize(self, tokens: Sequence[str]) -> np.ndarray:
        return self._matrix([list(tokens)]).toarray().ravel()

    def _search(self, query, matrix) -> Retrieval:
        if not self.pairs:
            raise DataError("retrieval pool is empty")
        sims = matrix @ self.vectorize(query)
        k = int(np.argmax(sims))
        return Retrieval(self.pairs[k].reference, k, float(sims[k]), bool(sims[k] <= 0.0))


def ir_ur(query: Sequence[str], index: RetrievalIndex) -> Retrieval:
    """Pool response most similar to the query."""
    return index._search(query, index.responses)


def ir_uu(query: Sequence[str], index: RetrievalIndex) -> Retrieval:
    """Response paired with the pool utterance most similar to the query."""
    return index._search(query, index.utterances)


def ir_cxt(query: Sequence[str], context: Sequence[Sequence[str]], index: RetrievalIndex
           ) -> Retrieval:
    """Pool response most similar to the query together with up to three previous utterances."""
    if len(context) > 3:
        raise ValueError("context holds at most three previous utterances")
    merged = [w for utt in context for w in utt] + list(query)
    return index._search(merged, index.responses)


def rnd(query, index: RetrievalIndex, seed) -> Retrieval:
    """Uniformly random pool response; ``seed`` is an int or a numpy Generator."""
    if len(index) == 0:
        raise DataError("retrieval pool is empty")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = int(rng.integers(len(index)))
    return Retrieval(index.pairs[k].reference, k, 0.0)
