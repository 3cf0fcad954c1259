"""Minimum error rate training of the four log-linear weights.

Coordinate ascent on corpus BLEU-4 over fixed n-best lists.  Along one
coordinate every candidate's score is a line, so the per-sentence winner is
piecewise constant; the line search walks the upper envelopes of all
sentences at once and picks the interval with the best corpus BLEU.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decoder import NBestList, WeightVector
from .errors import DataError
from .evaluation import MAX_N, BleuStats, bleu_from_vector

CLAMP = 10.0
IMPROVE_EPS = 1e-12


@dataclass
class TuningInstance:
    """One dev sentence: reference, candidate feature rows, candidate BLEU stats."""

    reference: tuple[str, ...]
    features: np.ndarray          # (n_candidates, 4)
    stats: np.ndarray             # (n_candidates, 2 * MAX_N + 2)
    candidates: list[tuple[str, ...]] = field(default_factory=list)

    @classmethod
    def from_candidates(cls, reference, candidates, features) -> "TuningInstance":
        features = np.asarray(features, dtype=float).reshape(len(candidates), -1)
        keep = np.all(np.isfinite(features), axis=1)
        candidates = [tuple(c) for c, k in zip(candidates, keep) if k]
        features = features[keep]
        if not candidates:
            raise DataError("tuning instance has no candidate with finite features")
        stats = np.array([BleuStats.from_sentence(c, reference).as_vector() for c in candidates])
        return cls(tuple(reference), features, stats, candidates)


def instances_from_nbest(nbests: dict[int, NBestList], references: Sequence[Sequence[str]]
                         ) -> list[TuningInstance]:
    out = []
    for sent_id in sorted(nbests):
        cands = [c for c in nbests[sent_id] if all(math.isfinite(v) for v in c.components)]
        if not cands:
            continue
        out.append(TuningInstance.from_candidates(
            references[sent_id], [c.tokens for c in cands], [c.components for c in cands]))
    return out


def _winners(instances, w) -> np.ndarray:
    return np.array([int(np.argmax(inst.features @ w)) for inst in instances])


def corpus_bleu(instances, weights) -> float:
    w = np.asarray(weights.as_tuple() if isinstance(weights, WeightVector) else weights, float)
    total = sum(inst.stats[k] for inst, k in zip(instances, _winners(instances, w)))
    return bleu_from_vector(total, MAX_N)


def upper_envelope(intercepts, slopes) -> list[tuple[float, int]]:
    """Segments ``(x_start, line_index)`` of max_i (a_i + b_i x), left to right.

    Among identical lines the lowest index represents them.
    """
    order = sorted(range(len(slopes)), key=lambda i: (slopes[i], -intercepts[i], i))
    hull: list[tuple[float, int]] = []
    prev_slope = None
    for i in order:
        if slopes[i] == prev_slope:
            continue
        prev_slope = slopes[i]
        x = -math.inf
        while hull:
            x0, j = hull[-1]
            x = (intercepts[j] - intercepts[i]) / (slopes[i] - slopes[j])
            if x <= x0:
                hull.pop()
                x = -math.inf
            else:
                break
        hull.append((x, i))
    return hull


def select_by_interval(thresholds: Sequence[float], bleu_per_interval: Sequence[float]) -> float:
    """Midpoint of the best interval between consecutive thresholds.

    Unbounded end intervals resolve to 10 beyond the outermost threshold;
    with no thresholds the answer is 0.  Ties go to the smaller value.
    """
    if len(bleu_per_interval) != len(thresholds) + 1:
        raise ValueError("need one BLEU value per interval")
    if not len(thresholds):
        return 0.0
    scores = np.asarray(bleu_per_interval, dtype=float)
    k = int(np.flatnonzero(scores >= scores.max() - IMPROVE_EPS)[0])
    if k == 0:
        return float(thresholds[0]) - CLAMP
    if k == len(thresholds):
        return float(thresholds[-1]) + CLAMP
    return 0.5 * (thresholds[k - 1] + thresholds[k])


def line_search(instances, w, coord: int) -> tuple[np.ndarray, np.ndarray]:
    """Thresholds along ``coord`` and corpus BLEU-4 on each interval between them."""
    events = []
    running = None
    for inst in instances:
        slopes = inst.features[:, coord]
        intercepts = inst.features @ w - w[coord] * slopes
        hull = upper_envelope(intercepts, slopes)
        first = inst.stats[hull[0][1]]
        running = first.copy() if running is None else running + first
        for (x, k), (_, k_prev) in zip(hull[1:], hull[:-1]):
            events.append((x, inst.stats[k] - inst.stats[k_prev]))
    events.sort(key=lambda e: e[0])
    thresholds = []
    bleus = [bleu_from_vector(running, MAX_N)]
    i = 0
    while i < len(events):
        x = events[i][0]
        while i < len(events) and events[i][0] == x:
            running = running + events[i][1]
            i += 1
        thresholds.append(x)
        bleus.append(bleu_from_vector(running, MAX_N))
    return np.array(thresholds), np.array(bleus)


def _coordinate_ascent(instances, w, max_outer_iterations):
    w = np.array(w, dtype=float)
    current = corpus_bleu(instances, w)
    history = [current]
    for _ in range(max_outer_iterations):
        moved = False
        for coord in range(len(w)):
            thresholds, bleus = line_search(instances, w, coord)
            if not len(thresholds):
                continue
            trial = w.copy()
            trial[coord] = select_by_interval(thresholds, bleus)
            score = corpus_bleu(instances, trial)
            if score > current + IMPROVE_EPS:
                w, current, moved = trial, score, True
        history.append(current)
        if not moved:
            break
    return w, current, history


@dataclass
class MertResult:
    weights: WeightVector
    bleu: float
    initial_bleu: float
    histories: list[list[float]]


def tune(instances: Sequence[TuningInstance], init_weights: WeightVector = WeightVector(),
         max_outer_iterations: int = 20, seed: int = 0, restarts: int = 8) -> MertResult:
    """Coordinate-ascent MERT from ``init_weights`` plus seeded random restarts.

    The best restart wins; ties keep the earliest, so the initial point is
    returned when nothing beats it.
    """
    if not instances:
        raise DataError("MERT needs at least one tuning instance")
    init = np.array(init_weights.as_tuple())
    rng = np.random.default_rng(seed)
    starts = [init] + [rng.uniform(-1.0, 1.0, size=4) for _ in range(restarts)]
    best_w, best_bleu = init, corpus_bleu(instances, init)
    initial_bleu = best_bleu
    histories = []
    for start in starts:
        w, score, history = _coordinate_ascent(instances, start, max_outer_iterations)
        histories.append(history)
        if score > best_bleu + IMPROVE_EPS:
            best_w, best_bleu = w, score
    return MertResult(WeightVector.from_sequence(best_w), best_bleu, initial_bleu, histories)


def mert(instances: Sequence[TuningInstance], init_weights: WeightVector = WeightVector(),
         max_outer_iterations: int = 20, seed: int = 0, restarts: int = 8) -> WeightVector:
    return tune(instances, init_weights, max_outer_iterations, seed, restarts).weights
