"""External word resources used by the humor features.

File formats (all UTF-8):

* embeddings: ``word v1 ... vD`` per line, optional ``COUNT D`` header
* pinyin:     ``char<TAB>syll1[,syll2...]``; only the first reading is kept
* sentiment:  ``word<TAB>float``
* antonyms / synonyms: ``w1<TAB>w2``
* slang:      one word per line
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError

SENTINEL = "?"

# Longest first so "zh" wins over "z".
INITIALS = ("zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g", "k",
            "h", "j", "q", "x", "r", "z", "c", "s")

# Syllables spelled with y/w carry no initial; map them to their underlying final.
_YW_FINALS = {
    "yi": "i", "ya": "ia", "yo": "io", "ye": "ie", "yao": "iao", "you": "iu",
    "yan": "ian", "yin": "in", "yang": "iang", "ying": "ing", "yong": "iong",
    "yu": "v", "yue": "ve", "yuan": "van", "yun": "vn",
    "wu": "u", "wa": "ua", "wo": "uo", "wai": "uai", "wei": "ui", "wan": "uan",
    "wen": "un", "wang": "uang", "weng": "ueng",
}

_TONE_MARKS = {"̄": 1, "́": 2, "̌": 3, "̀": 4}


def _parse_syllable(raw: str) -> tuple[str, int]:
    """Split a pinyin syllable into (toneless lowercase ASCII base, tone).

    Accepts numeric (``zhu4``) and diacritic (``zhù``) tone notation; ü is
    written ``v``.  Tone 0 means unmarked / neutral.
    """
    s = raw.strip().lower().replace("ü", "v").replace("u:", "v")
    tone = 0
    if s and s[-1] in "012345":
        tone = int(s[-1]) % 5
        s = s[:-1]
    out = []
    for ch in unicodedata.normalize("NFD", s):
        if ch in _TONE_MARKS:
            tone = _TONE_MARKS[ch]
        elif ch == "̈":  # diaeresis left over from a decomposed ü
            out[-1] = "v"
        elif not unicodedata.combining(ch):
            out.append(ch)
    base = "".join(out)
    if not base or not base.isascii() or not base.isalpha():
        raise ValueError(f"not a pinyin syllable: {raw!r}")
    return base, tone


def syllable_final(syllable: str) -> str:
    """Vowel-and-coda remainder of a toneless syllable (``hua`` → ``ua``)."""
    s = syllable
    if s in _YW_FINALS:
        return _YW_FINALS[s]
    for ini in INITIALS:
        if s.startswith(ini) and len(s) > len(ini):
            rest = s[len(ini):]
            if ini in "jqx" and rest.startswith("u"):
                rest = "v" + rest[1:]
            return rest
    return s


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, word):
        return word in self.vectors

    def __getitem__(self, word):
        return self.vectors[word]

    def get(self, word, default=None):
        return self.vectors.get(word, default)


@dataclass(frozen=True)
class PinyinTable:
    readings: dict[str, tuple[str, int]] = field(default_factory=dict)

    def __len__(self):
        return len(self.readings)


@dataclass(frozen=True)
class PairLexicon:
    pairs: frozenset = frozenset()

    @classmethod
    def from_pairs(cls, pairs):
        return cls(frozenset(frozenset((a, b)) for a, b in pairs))

    def contains(self, w1: str, w2: str) -> bool:
        return frozenset((w1, w2)) in self.pairs

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class Lexicons:
    """The five humor-feature resources bundled together; any may be empty."""

    embeddings: EmbeddingTable = field(default_factory=lambda: EmbeddingTable({}, 0))
    pinyin: PinyinTable = field(default_factory=PinyinTable)
    sentiment: dict[str, float] = field(default_factory=dict)
    antonyms: PairLexicon = field(default_factory=PairLexicon)
    synonyms: PairLexicon = field(default_factory=PairLexicon)
    slang: frozenset = frozenset()


def cosine(u, v) -> float:
    """Cosine similarity; defined as 0 when either vector is all zeros."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def pinyin_of(word: str, table: PinyinTable, tones: bool = False) -> list[str]:
    """Per-character syllables; unmapped characters give the sentinel ``"?"``."""
    out = []
    for ch in word:
        reading = table.readings.get(ch)
        if reading is None:
            out.append(SENTINEL)
        elif tones:
            out.append(f"{reading[0]}{reading[1]}")
        else:
            out.append(reading[0])
    return out


def is_homophone(w1: str, w2: str, table: PinyinTable, tones: bool = False) -> bool:
    p1 = pinyin_of(w1, table, tones)
    if not p1 or SENTINEL in p1:
        return False
    return p1 == pinyin_of(w2, table, tones)


def same_rhyme(w1: str, w2: str, table: PinyinTable) -> bool:
    """True iff the last syllables of both words share their final."""
    p1 = pinyin_of(w1, table)
    p2 = pinyin_of(w2, table)
    if not p1 or not p2 or p1[-1] == SENTINEL or p2[-1] == SENTINEL:
        return False
    return syllable_final(p1[-1]) == syllable_final(p2[-1])


# --- loaders -----------------------------------------------------------------

def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if line.strip():
                yield lineno, line


def load_embeddings(path) -> EmbeddingTable:
    vectors = {}
    dim = None
    for lineno, line in _lines(path):
        parts = line.split()
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
            dim = int(parts[1])
            continue
        try:
            vec = np.array([float(x) for x in parts[1:]])
        except ValueError:
            raise FormatError("non-numeric embedding entry", path, lineno) from None
        if dim is None:
            dim = len(vec)
        if len(vec) != dim or dim == 0:
            raise FormatError(f"expected {dim} components, got {len(vec)}", path, lineno)
        if np.isnan(vec).any():
            raise FormatError("NaN in embedding", path, lineno)
        vectors[parts[0]] = vec
    return EmbeddingTable(vectors, dim or 0)


def save_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for word in sorted(table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in table.vectors[word]) + "\n")


def load_pinyin(path) -> PinyinTable:
    readings = {}
    for lineno, line in _lines(path):
        parts = line.split("\t")
        if len(parts) != 2 or len(parts[0]) != 1:
            raise FormatError("expected 'char<TAB>syllables'", path, lineno)
        try:
            readings[parts[0]] = _parse_syllable(parts[1].split(",")[0])
        except ValueError as exc:
            raise FormatError(str(exc), path, lineno) from None
    return PinyinTable(readings)


def pinyin_table(mapping: dict[str, str]) -> PinyinTable:
    """Build a table in memory from ``{char: "syll1[,syll2]"}``."""
    return PinyinTable({ch: _parse_syllable(s.split(",")[0]) for ch, s in mapping.items()})


def load_sentiment(path) -> dict[str, float]:
    out = {}
    for lineno, line in _lines(path):
        parts = line.split("\t")
        try:
            word, value = parts
            value = float(value)
        except ValueError:
            raise FormatError("expected 'word<TAB>float'", path, lineno) from None
        if not math.isfinite(value):
            raise FormatError("polarity must be finite", path, lineno)
        out[word] = value
    return out


def load_pair_lexicon(path) -> PairLexicon:
    pairs = []
    for lineno, line in _lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError("expected 'w1<TAB>w2'", path, lineno)
        pairs.append((parts[0].strip(), parts[1].strip()))
    return PairLexicon.from_pairs(pairs)


def load_slang(path) -> frozenset:
    return frozenset(line.strip() for _, line in _lines(path))


LEXICON_FILES = {
    "embeddings": ("embeddings.txt", load_embeddings),
    "pinyin": ("pinyin.tsv", load_pinyin),
    "sentiment": ("sentiment.tsv", load_sentiment),
    "antonyms": ("antonyms.tsv", load_pair_lexicon),
    "synonyms": ("synonyms.tsv", load_pair_lexicon),
    "slang": ("slang.txt", load_slang),
}


def load_lexicons(directory) -> Lexicons:
    """Load whichever of the standard resource files exist in ``directory``."""
    directory = Path(directory)
    kwargs = {}
    for name, (filename, loader) in LEXICON_FILES.items():
        path = directory / filename
        if path.exists():
            kwargs[name] = loader(path)
    return Lexicons(**kwargs)
