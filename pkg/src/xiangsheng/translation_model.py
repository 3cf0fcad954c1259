"""Word translation model: alignment, relative-frequency φ, distortion.

Alignments are tuples with one entry per response position holding the
1-based source position that produced it, or 0 for the NULL token.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError, DataError, FormatError

NULL = "<NULL>"
NEG_INF = float("-inf")
DEFAULT_ALPHA = 0.6


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"distortion base alpha must lie in (0, 1), got {alpha}")


@dataclass
class Model1:
    """IBM Model 1 lexical table t(r|s), trained by EM.

    ``log_likelihoods[k]`` is the corpus log-likelihood under the parameters
    in force at the start of iteration ``k``; the last entry is for the
    final parameters.
    """

    t: dict[str, dict[str, float]] = field(default_factory=dict)
    log_likelihoods: list[float] = field(default_factory=list)

    def prob(self, s: str, r: str) -> float:
        return self.t.get(s, {}).get(r, 0.0)


def _em_pass(pairs, t, uniform):
    counts = defaultdict(lambda: defaultdict(float))
    loglik = 0.0
    for p in pairs:
        src = (NULL,) + tuple(p.source)
        norm = math.log(len(src))
        for r in p.reference:
            probs = [t[s][r] if t is not None else uniform for s in src]
            z = math.fsum(probs)
            loglik += math.log(z) - norm
            for s, pr in zip(src, probs):
                counts[s][r] += pr / z
    return counts, loglik


def train_model1(pairs: Sequence, iterations: int) -> Model1:
    if not pairs:
        raise DataError("cannot train an aligner on an empty corpus")
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    uniform = 1.0 / len({r for p in pairs for r in p.reference})
    t = None
    history = []
    for _ in range(iterations):
        counts, loglik = _em_pass(pairs, t, uniform)
        history.append(loglik)
        t = {}
        for s in sorted(counts):
            row = counts[s]
            total = math.fsum(row.values())
            t[s] = {r: c / total for r, c in sorted(row.items())}
    history.append(_em_pass(pairs, t, uniform)[1])
    return Model1(t, history)


def viterbi_alignment(source: Sequence[str], response: Sequence[str], model: Model1
                      ) -> tuple[int, ...]:
    """Best source position per response word.

    Ties among real source words go to the leftmost; NULL is chosen only
    when its probability strictly exceeds every real source word.
    """
    out = []
    for r in response:
        best, best_p = 0, -1.0
        for i, s in enumerate(source, 1):
            p = model.prob(s, r)
            if p > best_p:
                best, best_p = i, p
        if model.prob(NULL, r) > best_p:
            best = 0
        out.append(best)
    return tuple(out)


def train_alignment(pairs: Sequence, iterations: int = 10) -> list[tuple[int, ...]]:
    model = train_model1(pairs, iterations)
    return [viterbi_alignment(p.source, p.reference, model) for p in pairs]


@dataclass
class TranslationTable:
    """φ(r|s) rows keyed by source word (NULL included) plus the distortion base."""

    phi: dict[str, dict[str, float]]
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        _check_alpha(self.alpha)
        self._options = {}

    def prob(self, s: str, r: str) -> float:
        return self.phi.get(s, {}).get(r, 0.0)

    def options(self, s: str, k: int = 20) -> list[tuple[str, float]]:
        """Top-k responses for ``s`` by φ, ties broken by word order."""
        key = (s, k)
        if key not in self._options:
            row = self.phi.get(s, {})
            ranked = sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))
            self._options[key] = [(r, p) for r, p in ranked[:k] if p > 0.0]
        return self._options[key]

    def sources(self):
        return self.phi.keys()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# alpha={self.alpha!r}\n")
            for s in sorted(self.phi):
                for r in sorted(self.phi[s]):
                    fh.write(f"{s}\t{r}\t{self.phi[s][r]!r}\n")

    @classmethod
    def load(cls, path, alpha: float | None = None) -> "TranslationTable":
        phi: dict[str, dict[str, float]] = {}
        file_alpha = DEFAULT_ALPHA
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    if line.startswith("# alpha="):
                        file_alpha = float(line.split("=", 1)[1])
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise FormatError("expected 'source<TAB>response<TAB>phi'", path, lineno)
                try:
                    value = float(parts[2])
                except ValueError:
                    raise FormatError("phi is not a number", path, lineno) from None
                if not 0.0 <= value <= 1.0:
                    raise FormatError("phi outside [0, 1]", path, lineno)
                phi.setdefault(parts[0], {})[parts[1]] = value
        return cls(phi, file_alpha if alpha is None else alpha)


def estimate_phi(pairs: Sequence, alignments: Sequence[Sequence[int]],
                 alpha: float = DEFAULT_ALPHA) -> TranslationTable:
    """Relative-frequency φ(r|s) = count(s, r) / Σ_r' count(s, r'), unsmoothed."""
    if len(pairs) != len(alignments):
        raise ValueError("need exactly one alignment per pair")
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for p, a in zip(pairs, alignments):
        if len(a) != len(p.reference):
            raise ValueError("alignment length differs from response length")
        for r, pos in zip(p.reference, a):
            s = NULL if pos == 0 else p.source[pos - 1]
            counts[s][r] += 1
    phi = {}
    for s in sorted(counts):
        total = sum(counts[s].values())
        phi[s] = {r: c / total for r, c in sorted(counts[s].items())}
    return TranslationTable(phi, alpha)


def distortion(a_i: int, b_prev: int, alpha: float = DEFAULT_ALPHA) -> float:
    """α^|a_i - b_prev - 1|; a NULL-aligned position (a_i = 0) scores 1."""
    _check_alpha(alpha)
    if a_i == 0:
        return 1.0
    return alpha ** abs(a_i - b_prev - 1)


def log_distortion(a_i: int, b_prev: int, alpha: float) -> float:
    if a_i == 0:
        return 0.0
    return abs(a_i - b_prev - 1) * math.log(alpha)


def tm_log_score(source: Sequence[str], response: Sequence[str],
                 alignment: Sequence[int], table: TranslationTable
                 ) -> tuple[float, float]:
    """(Σ log φ, Σ log d) over response positions.

    NULL-aligned positions leave the previous source end position unchanged.
    A zero φ anywhere makes the first component -inf.
    """
    if len(alignment) != len(response):
        raise ValueError("alignment length differs from response length")
    log_phi = 0.0
    log_d = 0.0
    b_prev = 0
    for r, a in zip(response, alignment):
        s = NULL if a == 0 else source[a - 1]
        p = table.prob(s, r)
        if p <= 0.0:
            log_phi = NEG_INF
        elif log_phi != NEG_INF:
            log_phi += math.log(p)
        log_d += log_distortion(a, b_prev, table.alpha)
        if a != 0:
            b_prev = a
    return log_phi, log_d
