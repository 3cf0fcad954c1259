"""Corpus BLEU with a single reference, and human-rating ratio tables."""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError

MAX_N = 4
ASPECTS = ("readability", "entertainment", "relevance")


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class BleuStats:
    """Additive sufficient statistics for corpus BLEU up to order ``max_n``."""

    matches: np.ndarray = field(default_factory=lambda: np.zeros(MAX_N, dtype=np.int64))
    totals: np.ndarray = field(default_factory=lambda: np.zeros(MAX_N, dtype=np.int64))
    hyp_len: int = 0
    ref_len: int = 0

    @classmethod
    def from_sentence(cls, hyp: Sequence[str], ref: Sequence[str], max_n: int = MAX_N
                      ) -> "BleuStats":
        matches = np.zeros(max_n, dtype=np.int64)
        totals = np.zeros(max_n, dtype=np.int64)
        for n in range(1, max_n + 1):
            h = _ngram_counts(hyp, n)
            r = _ngram_counts(ref, n)
            matches[n - 1] = sum(min(c, r[g]) for g, c in h.items())
            totals[n - 1] = max(len(hyp) - n + 1, 0)
        return cls(matches, totals, len(hyp), len(ref))

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(self.matches + other.matches, self.totals + other.totals,
                         self.hyp_len + other.hyp_len, self.ref_len + other.ref_len)

    def __sub__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(self.matches - other.matches, self.totals - other.totals,
                         self.hyp_len - other.hyp_len, self.ref_len - other.ref_len)

    def __eq__(self, other):
        return (isinstance(other, BleuStats)
                and np.array_equal(self.matches, other.matches)
                and np.array_equal(self.totals, other.totals)
                and self.hyp_len == other.hyp_len and self.ref_len == other.ref_len)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.matches, self.totals, [self.hyp_len, self.ref_len]])

    @classmethod
    def from_vector(cls, v) -> "BleuStats":
        v = np.asarray(v, dtype=np.int64)
        k = (len(v) - 2) // 2
        return cls(v[:k].copy(), v[k:2 * k].copy(), int(v[-2]), int(v[-1]))

    def brevity_penalty(self) -> float:
        if self.hyp_len == 0:
            return 0.0
        return min(1.0, math.exp(1.0 - self.ref_len / self.hyp_len))

    def score(self, n: int = MAX_N) -> float:
        """BLEU-n in [0, 100]; 0 if any precision up to n is zero."""
        return bleu_from_vector(self.as_vector(), n)


def bleu_from_vector(v, n: int = MAX_N) -> float:
    """BLEU-n from a flat ``[matches.., totals.., hyp_len, ref_len]`` vector."""
    k = (len(v) - 2) // 2
    m = v[:n]
    t = v[k:k + n]
    hyp_len, ref_len = v[-2], v[-1]
    if hyp_len == 0 or np.any(m <= 0):
        return 0.0
    log_p = float(np.mean(np.log(m / t)))
    bp = min(0.0, 1.0 - ref_len / hyp_len)
    return 100.0 * math.exp(log_p + bp)


def corpus_stats(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
                 max_n: int = MAX_N) -> BleuStats:
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    total = BleuStats(np.zeros(max_n, dtype=np.int64), np.zeros(max_n, dtype=np.int64))
    for h, r in zip(hypotheses, references):
        total = total + BleuStats.from_sentence(h, r, max_n)
    return total


def bleu(hypotheses, references, max_n: int = MAX_N) -> dict[int, float]:
    """Corpus BLEU-1..max_n (percent), unsmoothed, single reference per sentence."""
    stats = corpus_stats(hypotheses, references, max_n)
    return {n: stats.score(n) for n in range(1, max_n + 1)}


# --- human ratings ------------------------------------------------------------

@dataclass(frozen=True)
class RatingRecord:
    system: str
    aspect: str
    item: str
    rater: str
    score: int


def read_ratings(path) -> list[RatingRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FormatError("expected system, aspect, item, rater, score", path, lineno)
            try:
                score = int(parts[4])
            except ValueError:
                raise FormatError("score is not an integer", path, lineno) from None
            if not 0 <= score <= 2:
                raise FormatError("score outside 0..2", path, lineno)
            if parts[1] not in ASPECTS:
                raise FormatError(f"unknown aspect {parts[1]!r}", path, lineno)
            records.append(RatingRecord(parts[0], parts[1], parts[2], parts[3], score))
    return records


def mean_ratings(records: Iterable[RatingRecord]) -> dict[tuple[str, str], float]:
    """Average over raters within an item, then over items."""
    per_item = defaultdict(list)
    for r in records:
        per_item[(r.system, r.aspect, r.item)].append(r.score)
    per_system = defaultdict(list)
    for (system, aspect, _), scores in per_item.items():
        per_system[(system, aspect)].append(sum(scores) / len(scores))
    return {key: sum(v) / len(v) for key, v in per_system.items()}


def rating_ratios(records: Iterable[RatingRecord], baseline_system: str
                  ) -> dict[tuple[str, str], float]:
    """100 × mean(system, aspect) / mean(baseline, aspect).

    Aspects where the baseline has no ratings or a zero mean are left out.
    """
    means = mean_ratings(records)
    out = {}
    for (system, aspect), m in sorted(means.items()):
        base = means.get((baseline_system, aspect))
        if base:
            out[(system, aspect)] = 100.0 * m / base
    return out


# --- reports ------------------------------------------------------------------

def format_bleu_table(results: dict[str, dict[int, float]]) -> str:
    max_n = max((max(r) for r in results.values()), default=MAX_N)
    orders = list(range(max_n, 0, -1))
    width = max([len(s) for s in results] + [6])
    lines = [" " * width + "".join(f"  BLEU-{n:<3d}" for n in orders)]
    for system, scores in results.items():
        lines.append(f"{system:<{width}}" + "".join(f"  {scores[n]:8.2f}" for n in orders))
    return "\n".join(lines) + "\n"


def format_ratio_table(ratios: dict[tuple[str, str], float]) -> str:
    systems = sorted({s for s, _ in ratios})
    width = max([len(a) for a in ASPECTS])
    lines = [" " * width + "".join(f"  {s:>10}" for s in systems)]
    for aspect in ASPECTS:
        cells = []
        for s in systems:
            v = ratios.get((s, aspect))
            cells.append(f"  {'-':>10}" if v is None else f"  {v:9.2f}%")
        lines.append(f"{aspect:<{width}}" + "".join(cells))
    return "\n".join(lines) + "\n"


def report_json(bleu_results=None, ratios=None) -> str:
    doc = {}
    if bleu_results is not None:
        doc["bleu"] = {s: {f"BLEU-{n}": v for n, v in sorted(r.items())}
                       for s, r in bleu_results.items()}
    if ratios is not None:
        nested = defaultdict(dict)
        for (s, a), v in ratios.items():
            nested[s][a] = v
        doc["rating_ratios"] = dict(nested)
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def read_token_lines(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh.read().splitlines()]
