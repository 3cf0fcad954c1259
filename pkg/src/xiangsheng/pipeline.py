"""End-to-end assembly: configuration, trained system, tuning, corpus runs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import RetrievalIndex, ir_cxt, ir_uu, ir_ur, rnd
from .corpus import UtterancePair
from .decoder import NBestList, WeightVector, decode_nbest, rerank_top5
from .errors import ConfigError, FormatError
from .humor import HumorForest, HumorScorer
from .language_model import DEFAULT_MU, NGramModel, train_lm
from .lexicons import Lexicons
from .mert import MertResult, TuningInstance, tune
from .translation_model import DEFAULT_ALPHA, TranslationTable, estimate_phi, train_alignment

CONFIG_ENV = "XIANGSHENG_CONFIG"


@dataclass
class PipelineConfig:
    """Run parameters: beam 100, rerank depth 5, 2000 test and 4000 dev pairs by default."""

    corpus: str | None = None
    lexicon: str | None = None
    lexicon_dir: str | None = None
    model_dir: str | None = None
    alpha: float = DEFAULT_ALPHA
    beam_width: int = 100
    rerank_depth: int = 5
    distortion_limit: int = 4
    options_per_word: int = 20
    test_size: int = 2000
    dev_size: int = 4000
    max_response_words: int = 60
    min_response_words: int = 2
    em_iterations: int = 10
    lm_order: int = 4
    lm_mu: float = DEFAULT_MU
    trees: int = 100
    max_depth: int = 12
    mert_restarts: int = 8
    lambda_tm: float = 1.0
    lambda_ds: float = 1.0
    lambda_lm: float = 1.0
    lambda_hm: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.rerank_depth > self.beam_width:
            raise ConfigError("rerank depth cannot exceed the beam width")

    @property
    def weights(self) -> WeightVector:
        return WeightVector(self.lambda_tm, self.lambda_ds, self.lambda_lm, self.lambda_hm)

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        """Read ``key=value`` lines; keyword overrides win over the file."""
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = (s.strip() for s in line.partition("="))
                key = key.replace("-", "_")
                if not sep or key not in types:
                    raise FormatError(f"unknown config key {key!r}", path, lineno)
                values[key] = _coerce(types[key], value, path, lineno)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_env(cls, **overrides) -> "PipelineConfig":
        path = os.environ.get(CONFIG_ENV)
        if path and Path(path).exists():
            return cls.from_file(path, **overrides)
        return cls(**{k: v for k, v in overrides.items() if v is not None})


def _coerce(type_name, value, path, lineno):
    t = str(type_name)
    try:
        if t.startswith("int"):
            return int(value)
        if t.startswith("float"):
            return float(value)
    except ValueError:
        raise FormatError(f"bad value {value!r}", path, lineno) from None
    return value


def train_translation_table(pairs: Sequence[UtterancePair], iterations: int = 10,
                            alpha: float = DEFAULT_ALPHA) -> TranslationTable:
    return estimate_phi(pairs, train_alignment(pairs, iterations), alpha)


@dataclass
class ResponseGenerator:
    """The SMT system: translation table + LM, optionally the humor scorer.

    Without ``humor`` this is the plain M1+M2 system (p_hm fixed at 1).
    """

    table: TranslationTable
    lm: NGramModel
    humor: HumorScorer | None = None
    weights: WeightVector = field(default_factory=WeightVector)
    beam_width: int = 100
    rerank_depth: int = 5
    distortion_limit: int = 4
    options_per_word: int = 20
    max_insertions: int = 0

    def nbest(self, source: Sequence[str], weights: WeightVector | None = None) -> NBestList:
        return decode_nbest(source, self.table, self.lm, self.humor, weights or self.weights,
                            beam_width=self.beam_width, distortion_limit=self.distortion_limit,
                            options_per_word=self.options_per_word,
                            max_insertions=self.max_insertions)

    def respond(self, source: Sequence[str], rerank: bool | None = None
                ) -> tuple[tuple[str, ...], NBestList]:
        """Final response and the n-best it came from.

        Reranks the top candidates by p_hm when a humor scorer is present
        (unless ``rerank=False``).  An empty n-best echoes the input back.
        """
        nb = self.nbest(source)
        if not nb.candidates:
            return tuple(source), nb
        if rerank is None:
            rerank = self.humor is not None
        if rerank:
            return rerank_top5(nb, self.rerank_depth).tokens, nb
        return nb.best.tokens, nb

    @classmethod
    def from_config(cls, config: PipelineConfig, table, lm, humor=None, weights=None):
        return cls(table, lm, humor, weights or config.weights, config.beam_width,
                   config.rerank_depth, config.distortion_limit, config.options_per_word)


def build_generator(train_pairs: Sequence[UtterancePair], config: PipelineConfig,
                    lm_sentences: Sequence[Sequence[str]] = (),
                    forest: HumorForest | None = None,
                    lexicons: Lexicons | None = None) -> ResponseGenerator:
    table = train_translation_table(train_pairs, config.em_iterations, config.alpha)
    lm = train_lm([p.reference for p in train_pairs] + list(lm_sentences),
                  config.lm_order, config.lm_mu)
    humor = HumorScorer(forest, lexicons or Lexicons()) if forest is not None else None
    return ResponseGenerator.from_config(config, table, lm, humor)


def tuning_instances(nbests: Sequence[NBestList], references) -> list[TuningInstance]:
    out = []
    for nb, ref in zip(nbests, references):
        if nb.candidates:
            out.append(TuningInstance.from_candidates(
                ref, [c.tokens for c in nb], [c.components for c in nb]))
    return out


def tune_generator(gen: ResponseGenerator, dev_pairs: Sequence[UtterancePair], seed: int,
                   restarts: int = 8, redecode_rounds: int = 0) -> MertResult:
    """MERT on dev n-best lists; optional re-decoding rounds merge new candidates in.

    Updates ``gen.weights`` in place and returns the final tuning result.
    """
    refs = [p.reference for p in dev_pairs]
    pools: list[dict] = [dict() for _ in dev_pairs]
    weights = gen.weights
    result = None
    for _ in range(redecode_rounds + 1):
        for pool, p in zip(pools, dev_pairs):
            for c in gen.nbest(p.source, weights):
                pool.setdefault(c.tokens, c.components)
        instances = [TuningInstance.from_candidates(ref, list(pool), list(pool.values()))
                     for pool, ref in zip(pools, refs) if pool]
        if not instances:
            break
        result = tune(instances, weights, seed=seed, restarts=restarts)
        weights = result.weights
    gen.weights = weights
    return result


def dialogue_contexts(all_pairs: Sequence[UtterancePair], targets: Sequence[UtterancePair],
                      size: int = 3) -> list[list[tuple[str, ...]]]:
    """Up to ``size`` utterances immediately preceding each target's source turn."""
    turns: dict[str, list] = {}
    for p in all_pairs:
        d = turns.setdefault(p.dialogue_id, [])
        d.append((p.turn_index, p.source))
        d.append((p.turn_index + 1, p.reference))
    for d in turns.values():
        d.sort(key=lambda t: t[0])
    out = []
    for p in targets:
        before = [tok for idx, tok in turns.get(p.dialogue_id, []) if idx < p.turn_index]
        out.append(before[-size:] if size else [])
    return out


def run_baseline(method: str, pool: Sequence[UtterancePair], queries: Sequence[UtterancePair],
                 seed: int | None = None, contexts=None, weighting: str = "tfidf"
                 ) -> list[tuple[str, ...]]:
    index = RetrievalIndex(pool, weighting)
    if method == "ir-ur":
        return [ir_ur(q.source, index).tokens for q in queries]
    if method == "ir-uu":
        return [ir_uu(q.source, index).tokens for q in queries]
    if method == "ir-cxt":
        contexts = contexts if contexts is not None else [[] for _ in queries]
        return [ir_cxt(q.source, c, index).tokens for q, c in zip(queries, contexts)]
    if method == "rnd":
        if seed is None:
            raise ConfigError("the random baseline requires a seed")
        rng = np.random.default_rng(seed)
        return [rnd(q.source, index, rng).tokens for q in queries]
    raise ConfigError(f"unknown baseline {method!r}")


__all__ = [
    "PipelineConfig", "ResponseGenerator", "build_generator", "dialogue_contexts",
    "run_baseline", "train_translation_table", "tune_generator", "tuning_instances",
]
