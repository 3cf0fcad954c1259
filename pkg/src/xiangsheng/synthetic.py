"""Deterministic toy data: a word-substitution cipher dialogue corpus.

Every penggen turn is the dougen turn with each word replaced through a
fixed one-to-one cipher, so a correct system can reach BLEU 100.  The
bundled copy under ``xiangsheng/data/cipher`` is produced by
``write_cipher_bundle``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).parent / "data" / "cipher"

# (character, pinyin) for both vocabularies; rhyme and homophone structure is deliberate.
SOURCE_WORDS = [
    ("天", "tian1"), ("地", "di4"), ("人", "ren2"), ("山", "shan1"), ("水", "shui3"),
    ("风", "feng1"), ("云", "yun2"), ("雨", "yu3"), ("花", "hua1"), ("草", "cao3"),
    ("鸟", "niao3"), ("鱼", "yu2"), ("马", "ma3"), ("牛", "niu2"), ("羊", "yang2"),
    ("猪", "zhu1"), ("狗", "gou3"), ("猫", "mao1"), ("书", "shu1"), ("笔", "bi3"),
    ("茶", "cha2"), ("酒", "jiu3"), ("饭", "fan4"), ("菜", "cai4"), ("门", "men2"),
    ("窗", "chuang1"), ("桌", "zhuo1"), ("椅", "yi3"), ("灯", "deng1"), ("车", "che1"),
]
RESPONSE_WORDS = [
    ("高", "gao1"), ("低", "di1"), ("大", "da4"), ("小", "xiao3"), ("好", "hao3"),
    ("坏", "huai4"), ("多", "duo1"), ("少", "shao3"), ("长", "chang2"), ("短", "duan3"),
    ("快", "kuai4"), ("慢", "man4"), ("新", "xin1"), ("旧", "jiu4"), ("冷", "leng3"),
    ("热", "re4"), ("甜", "tian2"), ("苦", "ku3"), ("真", "zhen1"), ("假", "jia3"),
    ("注", "zhu4"), ("意", "yi4"), ("尾", "wei3"), ("巴", "ba1"), ("吧", "ba5"),
    ("家", "jia1"), ("瓜", "gua1"), ("笑", "xiao4"), ("哭", "ku1"), ("跑", "pao3"),
]
ANTONYMS = [("高", "低"), ("大", "小"), ("好", "坏"), ("多", "少"), ("长", "短"),
            ("快", "慢"), ("新", "旧"), ("冷", "热"), ("甜", "苦"), ("真", "假"),
            ("笑", "哭")]
SYNONYMS = [("好", "真"), ("大", "高"), ("小", "低"), ("快", "跑")]
SENTIMENT = {"好": 1.0, "坏": -1.0, "甜": 0.5, "苦": -0.5, "笑": 1.0, "哭": -1.0,
             "真": 0.5, "假": -0.5}
SLANG = ["吧", "瓜"]


def make_cipher_corpus(n_pairs: int = 500, pairs_per_dialogue: int = 5, seed: int = 2017,
                       min_len: int = 3, max_len: int = 7) -> list[dict]:
    """Turn records for ``n_pairs`` (dougen, penggen) exchanges."""
    rng = np.random.default_rng(seed)
    cipher = {s: r for (s, _), (r, _) in zip(SOURCE_WORDS, RESPONSE_WORDS)}
    sources = [w for w, _ in SOURCE_WORDS]
    records = []
    for k in range(n_pairs):
        dialogue = f"d{k // pairs_per_dialogue:03d}"
        turn = 2 * (k % pairs_per_dialogue)
        length = int(rng.integers(min_len, max_len + 1))
        words = [sources[i] for i in rng.integers(len(sources), size=length)]
        records.append({"dialogue_id": dialogue, "turn": turn, "role": "dougen",
                        "text": " ".join(words)})
        records.append({"dialogue_id": dialogue, "turn": turn + 1, "role": "penggen",
                        "text": " ".join(cipher[w] for w in words)})
    return records


def make_embeddings(dim: int = 8, seed: int = 7) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    words = [w for w, _ in SOURCE_WORDS + RESPONSE_WORDS]
    vecs = np.round(rng.normal(size=(len(words), dim)), 4)
    return dict(zip(words, vecs))


def humor_label(input_words, response_words) -> str:
    """Synthetic annotation: humorous iff the response holds an antonym pair or slang."""
    resp = set(response_words)
    if any(a in resp and b in resp for a, b in ANTONYMS) or resp & set(SLANG):
        return "humorous"
    return "not_humorous"


def make_humor_data(n: int = 300, seed: int = 11) -> list[tuple[str, str, str]]:
    """Labeled (label, input, response) rows over random response-word strings."""
    rng = np.random.default_rng(seed)
    sources = [w for w, _ in SOURCE_WORDS]
    responses = [w for w, _ in RESPONSE_WORDS]
    rows = []
    for _ in range(n):
        inp = [sources[i] for i in rng.integers(len(sources), size=int(rng.integers(2, 6)))]
        resp = [responses[i] for i in rng.integers(len(responses), size=int(rng.integers(2, 6)))]
        rows.append((humor_label(inp, resp), " ".join(inp), " ".join(resp)))
    return rows


def write_cipher_bundle(directory=DATA_DIR) -> None:
    d = Path(directory)
    (d / "lexicons").mkdir(parents=True, exist_ok=True)
    with open(d / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for rec in make_cipher_corpus():
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(d / "humor.tsv", "w", encoding="utf-8") as fh:
        for row in make_humor_data():
            fh.write("\t".join(row) + "\n")
    with open(d / "segmentation_lexicon.txt", "w", encoding="utf-8") as fh:
        for w, _ in SOURCE_WORDS + RESPONSE_WORDS:
            fh.write(w + "\n")
    lex = d / "lexicons"
    with open(lex / "pinyin.tsv", "w", encoding="utf-8") as fh:
        for w, p in SOURCE_WORDS + RESPONSE_WORDS:
            fh.write(f"{w}\t{p}\n")
    with open(lex / "antonyms.tsv", "w", encoding="utf-8") as fh:
        fh.writelines(f"{a}\t{b}\n" for a, b in ANTONYMS)
    with open(lex / "synonyms.tsv", "w", encoding="utf-8") as fh:
        fh.writelines(f"{a}\t{b}\n" for a, b in SYNONYMS)
    with open(lex / "sentiment.tsv", "w", encoding="utf-8") as fh:
        fh.writelines(f"{w}\t{v}\n" for w, v in SENTIMENT.items())
    with open(lex / "slang.txt", "w", encoding="utf-8") as fh:
        fh.writelines(w + "\n" for w in SLANG)
    emb = make_embeddings()
    with open(lex / "embeddings.txt", "w", encoding="utf-8") as fh:
        dim = len(next(iter(emb.values())))
        fh.write(f"{len(emb)} {dim}\n")
        for w, v in emb.items():
            fh.write(w + " " + " ".join(f"{x:.4f}" for x in v) + "\n")


if __name__ == "__main__":
    write_cipher_bundle()
