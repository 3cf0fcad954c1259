"""Dialogue transcripts → segmented (dougen, penggen) utterance pairs.

Turn records are JSONL, one turn per line::

    {"dialogue_id": "d1", "turn": 0, "role": "dougen", "text": "..."}

Pairs are written back as JSONL with space-joined token strings, which is
lossless because tokens never contain whitespace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, FormatError, StructureError

ROLES = ("dougen", "penggen")


@dataclass(frozen=True)
class DialogueTurn:
    dialogue_id: str
    turn_index: int
    role: str
    text: str


@dataclass(frozen=True)
class UtterancePair:
    """One aligned unit: the dougen utterance and the penggen reply to it."""

    source: tuple[str, ...]
    reference: tuple[str, ...]
    dialogue_id: str = ""
    turn_index: int = 0


@dataclass(frozen=True)
class ExtractionStats:
    pairs: int
    dropped: int


@dataclass(frozen=True)
class CorpusSplit:
    train: list[UtterancePair]
    dev: list[UtterancePair]
    test: list[UtterancePair]
    seed: int


def load_corpus(path, format: str = "jsonl") -> list[DialogueTurn]:
    """Read turn records and return them grouped by dialogue, in turn order.

    Dialogues keep the order of their first appearance in the file.  Raises
    :class:`FormatError` (with the line number) for unparsable records and
    :class:`StructureError` when a dialogue repeats a turn index or two
    consecutive turns share a role.
    """
    if format != "jsonl":
        raise ConfigError(f"unsupported corpus format {format!r}")
    path = Path(path)
    groups: dict[str, list[DialogueTurn]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            turn = _parse_turn(line, path, lineno)
            groups.setdefault(turn.dialogue_id, []).append(turn)

    turns: list[DialogueTurn] = []
    for dialogue_id, group in groups.items():
        group.sort(key=lambda t: t.turn_index)
        for prev, cur in zip(group, group[1:]):
            if cur.turn_index == prev.turn_index:
                raise StructureError(
                    f"dialogue {dialogue_id!r}: duplicate turn index {cur.turn_index}")
            if cur.role == prev.role:
                raise StructureError(
                    f"dialogue {dialogue_id!r}: roles do not alternate at turns "
                    f"{prev.turn_index} and {cur.turn_index} (both {cur.role})")
        turns.extend(group)
    return turns


def _parse_turn(line: str, path, lineno: int) -> DialogueTurn:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON ({exc.msg})", path, lineno) from None
    if not isinstance(rec, dict):
        raise FormatError("turn record must be a JSON object", path, lineno)
    try:
        dialogue_id, turn, role, text = rec["dialogue_id"], rec["turn"], rec["role"], rec["text"]
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}", path, lineno) from None
    if not isinstance(turn, int) or isinstance(turn, bool) or turn < 0:
        raise FormatError("'turn' must be a non-negative integer", path, lineno)
    if role not in ROLES:
        raise FormatError(f"unknown role {role!r}", path, lineno)
    if not isinstance(text, str):
        raise FormatError("'text' must be a string", path, lineno)
    return DialogueTurn(str(dialogue_id), turn, role, text)


def load_lexicon(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def segment(text: str, lexicon: Iterable[str] = ()) -> list[str]:
    """Greedy left-to-right longest-match segmentation.

    Whitespace always separates tokens.  A character that does not start any
    lexicon word becomes a token on its own.

    >>> segment("aba", {"ab", "a", "b"})
    ['ab', 'a']
    """
    if not isinstance(lexicon, (set, frozenset)):
        lexicon = frozenset(lexicon)
    longest = max((len(w) for w in lexicon), default=1)
    tokens = []
    for chunk in text.split():
        i = 0
        while i < len(chunk):
            for n in range(min(longest, len(chunk) - i), 0, -1):
                if n == 1 or chunk[i:i + n] in lexicon:
                    tokens.append(chunk[i:i + n])
                    i += n
                    break
    return tokens


def extract_pairs(turns: Sequence[DialogueTurn], lexicon: Iterable[str] = ()
                  ) -> tuple[list[UtterancePair], ExtractionStats]:
    """One pair per dougen turn immediately followed by a penggen turn.

    Turns that cannot be paired (a trailing dougen, a dialogue that opens
    with penggen) are skipped and counted in ``ExtractionStats.dropped``.
    """
    lexicon = frozenset(lexicon)
    pairs = []
    dropped = 0
    i = 0
    while i < len(turns):
        cur = turns[i]
        nxt = turns[i + 1] if i + 1 < len(turns) else None
        if (cur.role == "dougen" and nxt is not None and nxt.role == "penggen"
                and nxt.dialogue_id == cur.dialogue_id):
            pairs.append(UtterancePair(tuple(segment(cur.text, lexicon)),
                                       tuple(segment(nxt.text, lexicon)),
                                       cur.dialogue_id, cur.turn_index))
            i += 2
        else:
            dropped += 1
            i += 1
    return pairs, ExtractionStats(len(pairs), dropped)


def filter_pairs(pairs: Iterable[UtterancePair], max_response_words: int = 60,
                 min_response_words: int = 2) -> list[UtterancePair]:
    """Keep pairs whose response length lies in [min, max] and whose source is non-empty."""
    if max_response_words < min_response_words:
        raise ConfigError(
            f"max_response_words ({max_response_words}) < min_response_words "
            f"({min_response_words})")
    return [p for p in pairs
            if p.source and min_response_words <= len(p.reference) <= max_response_words]


def split(pairs: Sequence[UtterancePair], test_size: int, dev_size: int, seed: int
          ) -> CorpusSplit:
    """Random test/dev/train partition; each part keeps the input order."""
    if test_size < 0 or dev_size < 0:
        raise ConfigError("split sizes must be non-negative")
    if test_size + dev_size > len(pairs):
        raise DataError(
            f"test_size + dev_size = {test_size + dev_size} exceeds corpus size {len(pairs)}")
    order = np.random.default_rng(seed).permutation(len(pairs))
    test_idx = np.sort(order[:test_size])
    dev_idx = np.sort(order[test_size:test_size + dev_size])
    train_idx = np.sort(order[test_size + dev_size:])
    return CorpusSplit(train=[pairs[i] for i in train_idx],
                       dev=[pairs[i] for i in dev_idx],
                       test=[pairs[i] for i in test_idx],
                       seed=seed)


def write_pairs(pairs: Iterable[UtterancePair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            rec = {"dialogue_id": p.dialogue_id, "turn": p.turn_index,
                   "source": " ".join(p.source), "reference": " ".join(p.reference)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_pairs(path) -> list[UtterancePair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pairs.append(UtterancePair(tuple(rec["source"].split()),
                                           tuple(rec["reference"].split()),
                                           str(rec.get("dialogue_id", "")),
                                           int(rec.get("turn", 0))))
            except (json.JSONDecodeError, KeyError, AttributeError, TypeError, ValueError) as exc:
                raise FormatError(f"bad pair record ({exc})", path, lineno) from None
    return pairs
