"""Interpolated n-gram language model (order ≤ 4) over response tokens.

Probabilities use recursive Jelinek-Mercer interpolation down to a uniform
distribution over the predictable vocabulary plus ``<unk>``::

    p_k(w | h) = mu_k * c(h w) / c(h .) + (1 - mu_k) * p_{k-1}(w | h')   if c(h .) > 0
    p_k(w | h) = p_{k-1}(w | h')                                          otherwise
    p_0(w)     = 1 / (V + 1)

where ``V`` counts the distinct predicted types seen in training (words and
``</s>``; ``<s>`` is never predicted).  Every conditional distribution is
therefore exactly normalized and strictly positive.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ConfigError, DataError, FormatError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
MAX_ORDER = 4
DEFAULT_MU = 0.75


@dataclass
class NGramModel:
    order: int
    counts: list[Counter]            # counts[n] maps n-tuples → count; counts[0] unused
    mu: tuple[float, ...]            # mu[k-1] is the weight at level k
    vocab: frozenset = frozenset()   # predicted types, </s> included, <unk> excluded
    context_counts: list[Counter] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise ConfigError(f"order must be in 1..{MAX_ORDER}")
        if len(self.mu) != self.order or any(not 0.0 <= m <= 1.0 for m in self.mu):
            raise ConfigError("need one interpolation weight in [0, 1] per order")
        if not self.vocab:
            self.vocab = frozenset(w for (w,) in self.counts[1])
        if not self.context_counts:
            ctx = [Counter() for _ in range(self.order + 1)]
            for n in range(1, self.order + 1):
                for gram, c in self.counts[n].items():
                    ctx[n][gram[:-1]] += c
            self.context_counts = ctx
        self._cache = {}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def effective_weights(self) -> tuple[float, ...]:
        """Mixture weights (highest order first, uniform last) for a history seen at every level."""
        weights = []
        rest = 1.0
        for k in range(self.order, 0, -1):
            weights.append(rest * self.mu[k - 1])
            rest *= 1.0 - self.mu[k - 1]
        weights.append(rest)
        return tuple(weights)

    def map_token(self, w: str) -> str:
        return w if w in self.vocab else UNK

    def prob(self, word: str, history: Sequence[str] = ()) -> float:
        """p(word | history); only the last order-1 history tokens matter."""
        word = self.map_token(word)
        hist = tuple(h if h == BOS else self.map_token(h) for h in history)
        hist = hist[len(hist) - (self.order - 1):] if self.order > 1 else ()
        key = (word, hist)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        p = 1.0 / (self.vocab_size + 1)
        for k in range(1, self.order + 1):
            if k - 1 > len(hist):
                break
            h = hist[len(hist) - (k - 1):] if k > 1 else ()
            denom = self.context_counts[k].get(h, 0)
            if denom > 0:
                ml = self.counts[k].get(h + (word,), 0) / denom
                p = self.mu[k - 1] * ml + (1.0 - self.mu[k - 1]) * p
        if len(self._cache) < 1_000_000:
            self._cache[key] = p
        return p

    def log_prob_word(self, word: str, history: Sequence[str]) -> float:
        return math.log(self.prob(word, history))

    def start_state(self) -> tuple[str, ...]:
        return (BOS,) * (self.order - 1)

    # --- persistence ----------------------------------------------------

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            mu = ",".join(repr(m) for m in self.mu)
            fh.write(f"#order={self.order}\tvocab={self.vocab_size}\tmu={mu}\n")
            for n in range(1, self.order + 1):
                for gram in sorted(self.counts[n]):
                    fh.write(f"{n}\t{' '.join(gram)}\t{self.counts[n][gram]}\n")

    @classmethod
    def load(cls, path) -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            try:
                fields = dict(kv.split("=", 1) for kv in header.lstrip("#").split("\t"))
                order = int(fields["order"])
                vocab_size = int(fields["vocab"])
                mu = tuple(float(m) for m in fields["mu"].split(","))
            except (KeyError, ValueError):
                raise FormatError("bad count-file header", path, 1) from None
            counts = [Counter() for _ in range(order + 1)]
            for lineno, line in enumerate(fh, 2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                try:
                    n, gram, c = int(parts[0]), tuple(parts[1].split(" ")), int(parts[2])
                except (IndexError, ValueError):
                    raise FormatError("expected 'n<TAB>w1 .. wn<TAB>count'", path, lineno) from None
                if n != len(gram) or not 1 <= n <= order or c <= 0:
                    raise FormatError("inconsistent n-gram record", path, lineno)
                counts[n][gram] = c
        model = cls(order, counts, mu)
        if model.vocab_size != vocab_size:
            raise FormatError(
                f"header vocab={vocab_size} but file has {model.vocab_size} unigram types", path, 1)
        return model


def train_lm(sentences: Iterable[Sequence[str]], order: int = MAX_ORDER,
             mu: float | Sequence[float] = DEFAULT_MU) -> NGramModel:
    """Count n-grams of orders 1..order over padded sentences.

    Each sentence is padded with three ``<s>`` and one ``</s>``; every
    non-``<s>`` position contributes one n-gram per order.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ConfigError(f"order must be in 1..{MAX_ORDER}")
    mus = (mu,) * order if isinstance(mu, (int, float)) else tuple(mu)
    counts = [Counter() for _ in range(order + 1)]
    pad = MAX_ORDER - 1
    seen = 0
    for sent in sentences:
        seen += 1
        padded = (BOS,) * pad + tuple(sent) + (EOS,)
        for j in range(pad, len(padded)):
            for n in range(1, order + 1):
                counts[n][padded[j - n + 1:j + 1]] += 1
    if seen == 0:
        raise DataError("language model needs at least one training sentence")
    return NGramModel(order, counts, mus)


def lm_log_prob(model: NGramModel, tokens: Sequence[str]) -> float:
    """Natural-log probability of ``tokens`` followed by ``</s>``."""
    hist = list(model.start_state())
    total = 0.0
    for w in list(tokens) + [EOS]:
        total += model.log_prob_word(w, hist)
        hist.append(w)
    return total
