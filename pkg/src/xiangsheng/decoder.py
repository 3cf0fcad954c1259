"""Stack decoding into scored n-best lists, and the top-k humor rerank.

Each source word is replaced by exactly one response word; the order of
replacement is free up to the distortion limit.  Hypotheses are grouped
into stacks by the number of response words emitted and pruned to the beam
width by their weighted translation + distortion + LM score.  Humor is
scored only on completed candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FormatError
from .language_model import EOS, NGramModel
from .translation_model import NULL, TranslationTable

NEG_INF = float("-inf")
HUMOR_FLOOR = 1e-6
COMPONENTS = ("tm", "ds", "lm", "hm")


@dataclass(frozen=True)
class WeightVector:
    tm: float = 1.0
    ds: float = 1.0
    lm: float = 1.0
    hm: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError("weights must be finite")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.tm, self.ds, self.lm, self.hm)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    @classmethod
    def from_sequence(cls, values) -> "WeightVector":
        return cls(*(float(v) for v in values))

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(*(c * v for v in self.as_tuple()))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, v in zip(COMPONENTS, self.as_tuple()):
                fh.write(f"lambda_{name}={v!r}\n")

    @classmethod
    def load(cls, path) -> "WeightVector":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep or not key.startswith("lambda_") or key[7:] not in COMPONENTS:
                    raise FormatError("expected 'lambda_<tm|ds|lm|hm>=value'", path, lineno)
                try:
                    values[key[7:]] = float(value)
                except ValueError:
                    raise FormatError("weight is not a number", path, lineno) from None
        missing = set(COMPONENTS) - set(values)
        if missing:
            raise FormatError(f"missing weights: {', '.join(sorted(missing))}", path)
        return cls(**values)


def combined_score(components: Sequence[float], weights: WeightVector) -> float:
    """Σ λ_k · component_k; zero weights ignore their component entirely.

    A -inf component under a non-zero weight makes the candidate infeasible
    (-inf) whatever the sign of the weight.
    """
    total = 0.0
    for c, w in zip(components, weights.as_tuple()):
        if w == 0.0:
            continue
        if c == NEG_INF:
            return NEG_INF
        total += w * c
    return total


def humor_log(p: float) -> float:
    return math.log(max(p, HUMOR_FLOOR))


@dataclass(frozen=True)
class Candidate:
    tokens: tuple[str, ...]
    alignment: tuple[int, ...]
    tm: float
    ds: float
    lm: float
    hm: float
    combined: float

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.tm, self.ds, self.lm, self.hm)

    @property
    def humor(self) -> float:
        return math.exp(self.hm)


@dataclass
class NBestList:
    candidates: list[Candidate] = field(default_factory=list)
    diagnostic: str | None = None

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]

    @property
    def best(self) -> Candidate | None:
        return self.candidates[0] if self.candidates else None


@dataclass(frozen=True)
class _Hyp:
    score: float
    tokens: tuple[str, ...]
    alignment: tuple[int, ...]
    coverage: int
    b: int
    tm: float
    ds: float
    lm: float

    def sort_key(self):
        return (-self.score, self.tokens, self.alignment)


def decode_nbest(source: Sequence[str], table: TranslationTable, lm: NGramModel,
                 humor: Callable[[Sequence[str], Sequence[str]], float] | None = None,
                 weights: WeightVector = WeightVector(),
                 beam_width: int = 100, distortion_limit: int = 4,
                 options_per_word: int = 20, max_insertions: int = 0) -> NBestList:
    """Decode ``source`` into at most ``beam_width`` distinct responses.

    ``humor(source, response)`` returns p_hm; without it the hm component is
    0 (p_hm = 1).  ``max_insertions > 0`` additionally lets each hypothesis
    emit that many words drawn from φ(·|NULL) without covering a source word.
    """
    source = tuple(source)
    n = len(source)
    if n == 0:
        raise ValueError("cannot decode an empty utterance")
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    full = (1 << n) - 1
    log_alpha = math.log(table.alpha)
    w_tm, w_ds, w_lm, _ = weights.as_tuple()
    hist_len = lm.order - 1
    start = lm.start_state()

    def lm_state(tokens):
        h = start + tokens
        return h[len(h) - hist_len:] if hist_len else ()

    options = [table.options(s, options_per_word) for s in source]
    null_options = table.options(NULL, options_per_word) if max_insertions else []

    # φ options are strictly positive and the LM never returns 0, so partial
    # scores stay finite.
    def partial(tm, ds, lmv):
        return w_tm * tm + w_ds * ds + w_lm * lmv

    n_stacks = n + max_insertions + 1
    stacks: list[dict] = [dict() for _ in range(n_stacks)]
    stacks[0][(0, (), 0)] = _Hyp(0.0, (), (), 0, 0, 0.0, 0.0, 0.0)
    completed: list[_Hyp] = []

    def push(k, hyp):
        if hyp.coverage == full:
            # no distortion is left to pay, so b is irrelevant; keep each response once
            key = (full, hyp.tokens, -1)
        else:
            key = (hyp.coverage, hyp.tokens[-3:], hyp.b)
        old = stacks[k].get(key)
        if old is None or hyp.sort_key() < old.sort_key():
            stacks[k][key] = hyp

    for k in range(n_stacks):
        beam = sorted(stacks[k].values(), key=_Hyp.sort_key)[:beam_width]
        for h in beam:
            if h.coverage == full:
                completed.append(h)
            if k + 1 >= n_stacks:
                continue
            state = lm_state(h.tokens)
            for j in range(1, n + 1):
                if h.coverage >> (j - 1) & 1 or abs(j - h.b - 1) > distortion_limit:
                    continue
                cov = h.coverage | 1 << (j - 1)
                if cov != full:
                    # keep the first uncovered word reachable, so no hypothesis dead-ends
                    gap = ((~cov) & (cov + 1)).bit_length()
                    if abs(gap - j - 1) > distortion_limit:
                        continue
                ds = h.ds + abs(j - h.b - 1) * log_alpha
                for r, p in options[j - 1]:
                    tm = h.tm + math.log(p)
                    lmv = h.lm + lm.log_prob_word(r, state)
                    push(k + 1, _Hyp(partial(tm, ds, lmv), h.tokens + (r,), h.alignment + (j,),
                                     cov, j, tm, ds, lmv))
            if len(h.tokens) - bin(h.coverage).count("1") < max_insertions:
                for r, p in null_options:
                    tm = h.tm + math.log(p)
                    lmv = h.lm + lm.log_prob_word(r, state)
                    push(k + 1, _Hyp(partial(tm, h.ds, lmv), h.tokens + (r,), h.alignment + (0,),
                                     h.coverage, h.b, tm, h.ds, lmv))

    finals: dict[tuple, _Hyp] = {}
    for h in completed:
        lmv = h.lm + lm.log_prob_word(EOS, lm_state(h.tokens))
        done = _Hyp(partial(h.tm, h.ds, lmv), h.tokens, h.alignment, h.coverage, h.b,
                    h.tm, h.ds, lmv)
        if done.score == NEG_INF:
            continue
        old = finals.get(done.tokens)
        if old is None or done.sort_key() < old.sort_key():
            finals[done.tokens] = done

    if not finals:
        return NBestList([], diagnostic=f"no translatable candidate for {' '.join(source)!r}")

    cands = []
    for h in finals.values():
        hm = humor_log(humor(source, h.tokens)) if humor is not None else 0.0
        comps = (h.tm, h.ds, h.lm, hm)
        cands.append(Candidate(h.tokens, h.alignment, *comps, combined_score(comps, weights)))
    cands.sort(key=lambda c: (-c.combined, c.tokens))
    return NBestList(cands[:beam_width])


def rerank_top5(nbest: NBestList | Sequence[Candidate], depth: int = 5,
                humor: Callable[[Candidate], float] | None = None) -> Candidate:
    """Among the first ``depth`` candidates, the one with the highest p_hm.

    Ties keep the earlier (higher combined score) candidate.
    """
    cands = list(nbest)
    if not cands:
        raise ValueError("cannot rerank an empty n-best list")
    score = humor or (lambda c: c.humor)
    head = cands[:depth]
    probs = [score(c) for c in head]
    return head[int(np.argmax(probs))]


# --- n-best files ------------------------------------------------------------

def format_nbest(sent_id: int, nbest: Iterable[Candidate]) -> str:
    lines = []
    for c in nbest:
        comps = " ".join(repr(float(v)) for v in c.components)
        lines.append(f"{sent_id} ||| {' '.join(c.tokens)} ||| {comps} ||| {float(c.combined)!r}\n")
    return "".join(lines)


def write_nbest(path, nbests: Iterable[NBestList]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, nb in enumerate(nbests):
            fh.write(format_nbest(i, nb))


def read_nbest(path) -> dict[int, NBestList]:
    """Parse an n-best file; sentence ids with no candidates are absent."""
    out: dict[int, NBestList] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = [p.strip() for p in line.split("|||")]
            try:
                sent_id = int(parts[0])
                comps = [float(v) for v in parts[2].split()]
                combined = float(parts[3])
            except (IndexError, ValueError):
                raise FormatError("expected 'id ||| tokens ||| tm ds lm hm ||| score'",
                                  path, lineno) from None
            if len(parts) != 4 or len(comps) != 4:
                raise FormatError("expected 4 fields and 4 component scores", path, lineno)
            tokens = tuple(parts[1].split())
            out.setdefault(sent_id, NBestList()).candidates.append(
                Candidate(tokens, (), *comps, combined))
    return out
