import math

import numpy as np
import pytest

from oracles import enumerate_nbest, random_instance
from xiangsheng.decoder import (
    Candidate, NBestList, WeightVector, combined_score, decode_nbest, read_nbest,
    rerank_top5, write_nbest,
)
from xiangsheng.errors import FormatError
from xiangsheng.language_model import train_lm
from xiangsheng.translation_model import NULL, TranslationTable

NEG_INF = float("-inf")


def uniform_lm():
    # unigram model with mu=0 gives the uniform floor for every word
    return train_lm([("x", "y")], order=1, mu=0.0)


@pytest.mark.parametrize("weights, comps, expected", [
    ((1, 1, 1, 1), (-1, -2, -3, -4), -10),
    ((2, 1, 1, 0), (-1, -1, -1, -9), -4),
    ((1, 1, 1, 0), (-1, -1, -1, NEG_INF), -3),
    ((1, 1, 1, 1), (-1, -1, -1, NEG_INF), NEG_INF),
    ((1, -1, 1, 1), (-1, NEG_INF, -1, -1), NEG_INF),
])
def test_combined_score(weights, comps, expected):
    assert combined_score(comps, WeightVector(*weights)) == expected


def test_single_option():
    table = TranslationTable({"a": {"x": 1.0}})
    nb = decode_nbest(["a"], table, uniform_lm())
    assert [c.tokens for c in nb] == [("x",)]


def test_monotone_beats_swap():
    table = TranslationTable({"a": {"x": 1.0}, "b": {"y": 1.0}}, alpha=0.5)
    nb = decode_nbest(["a", "b"], table, uniform_lm(), weights=WeightVector(1, 1, 1, 0))
    assert [c.tokens for c in nb] == [("x", "y"), ("y", "x")]
    assert nb[0].ds == 0.0
    assert nb[1].ds == pytest.approx(3 * math.log(0.5))
    assert nb[0].alignment == (1, 2) and nb[1].alignment == (2, 1)


def test_nbest_size_three_words_two_options():
    table = TranslationTable({"a": {"p": .5, "q": .5}, "b": {"r": .5, "s": .5},
                              "c": {"t": .5, "u": .5}})
    lm = train_lm([("p", "r", "t")])
    nb = decode_nbest(["a", "b", "c"], table, lm, beam_width=100)
    reachable = enumerate_nbest(("a", "b", "c"), table, lm, WeightVector(1, 1, 1, 0))
    assert len(reachable) == 48
    assert len(nb) == min(100, len(reachable))
    assert len(decode_nbest(["a", "b", "c"], table, lm, beam_width=10)) == 10


def test_matches_exhaustive_oracle():
    rng = np.random.default_rng(123)
    for _ in range(60):
        source, table, lm, w = random_instance(rng)
        nb = decode_nbest(source, table, lm, weights=w, beam_width=1000)
        oracle = enumerate_nbest(source, table, lm, w)
        assert [c.tokens for c in nb] == [t for t, _ in oracle]
        assert [c.combined for c in nb] == [s for _, s in oracle]


def test_nbest_invariants():
    rng = np.random.default_rng(5)
    for _ in range(30):
        source, table, lm, w = random_instance(rng, max_len=5)
        nb = decode_nbest(source, table, lm, weights=w, beam_width=20)
        scores = [c.combined for c in nb]
        assert scores == sorted(scores, reverse=True)
        assert len({c.tokens for c in nb}) == len(nb)
        for c in nb:
            assert len(c.tokens) == len(source)
            assert sorted(c.alignment) == list(range(1, len(source) + 1))


def test_exhaustive_beam_dominates_smaller_beams():
    rng = np.random.default_rng(11)
    for _ in range(25):
        source, table, lm, w = random_instance(rng, max_len=4, max_options=3)
        best = enumerate_nbest(source, table, lm, w)[0][1]
        assert decode_nbest(source, table, lm, weights=w, beam_width=5000)[0].combined == best
        for b in (1, 2, 5, 10, 50):
            assert decode_nbest(source, table, lm, weights=w, beam_width=b)[0].combined <= best


def test_beam_growth_on_short_inputs():
    rng = np.random.default_rng(3)
    for _ in range(40):
        source, table, lm, w = random_instance(rng, max_len=2, max_options=3)
        tops = [decode_nbest(source, table, lm, weights=w, beam_width=b)[0].combined
                for b in (1, 2, 4, 8, 16)]
        assert all(b >= a for a, b in zip(tops, tops[1:]))


def test_weight_scaling_keeps_ranking():
    rng = np.random.default_rng(8)
    for _ in range(20):
        source, table, lm, w = random_instance(rng)
        a = decode_nbest(source, table, lm, weights=w, beam_width=500)
        b = decode_nbest(source, table, lm, weights=w.scaled(3.5), beam_width=500)
        assert [c.tokens for c in a] == [c.tokens for c in b]


def test_no_candidate_gives_diagnostic():
    table = TranslationTable({"a": {"x": 1.0}})
    nb = decode_nbest(["zz"], table, uniform_lm())
    assert len(nb) == 0 and "zz" in nb.diagnostic


def test_empty_source_rejected():
    with pytest.raises(ValueError):
        decode_nbest([], TranslationTable({}), uniform_lm())


def test_humor_added_after_search():
    table = TranslationTable({"a": {"x": 0.6, "y": 0.4}})
    lm = uniform_lm()
    humor = lambda s, r: 0.9 if r == ("y",) else 0.1  # noqa: E731
    plain = decode_nbest(["a"], table, lm, weights=WeightVector(1, 1, 1, 0))
    funny = decode_nbest(["a"], table, lm, humor=humor, weights=WeightVector(1, 1, 1, 5))
    assert plain[0].tokens == ("x",)
    assert funny[0].tokens == ("y",)
    assert funny[0].hm == pytest.approx(math.log(0.9))


def test_null_insertions_behind_flag():
    table = TranslationTable({"a": {"x": 1.0}, NULL: {"ah": 1.0}})
    lm = uniform_lm()
    off = decode_nbest(["a"], table, lm)
    on = decode_nbest(["a"], table, lm, max_insertions=1)
    assert {c.tokens for c in off} == {("x",)}
    assert {c.tokens for c in on} == {("x",), ("ah", "x"), ("x", "ah")}
    inserted = next(c for c in on if c.tokens == ("ah", "x"))
    assert inserted.alignment == (0, 1) and inserted.ds == 0.0


def cand(tokens, combined, humor):
    return Candidate(tuple(tokens), (), 0.0, 0.0, 0.0, math.log(humor), combined)


def test_rerank_examples():
    probs = (0.1, 0.9, 0.3, 0.2, 0.5, 0.99)
    nb = NBestList([cand([str(i)], -i, p) for i, p in enumerate(probs)])
    assert rerank_top5(nb).tokens == ("1",)
    short = NBestList(nb.candidates[:3])
    assert rerank_top5(short).tokens == ("1",)
    ties = NBestList([cand([str(i)], -i, 0.4) for i in range(5)])
    assert rerank_top5(ties).tokens == ("0",)
    with pytest.raises(ValueError):
        rerank_top5(NBestList())


def test_rerank_random_lists():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        probs = rng.choice([0.1, 0.2, 0.5, 0.7], size=n)
        nb = NBestList([cand([f"w{i}"], -float(i), float(p)) for i, p in enumerate(probs)])
        chosen = rerank_top5(nb)
        head = nb.candidates[:5]
        assert chosen in head
        best = max(c.humor for c in head)
        first = next(c for c in head if c.humor == best)
        assert chosen is first


def test_nbest_file_round_trip(tmp_path):
    table = TranslationTable({"a": {"x": .7, "y": .3}, "b": {"z": 1.0}})
    lm = train_lm([("x", "z")])
    nbs = [decode_nbest(["a", "b"], table, lm), NBestList(), decode_nbest(["b"], table, lm)]
    write_nbest(tmp_path / "n.txt", nbs)
    back = read_nbest(tmp_path / "n.txt")
    assert sorted(back) == [0, 2]
    for i in (0, 2):
        assert [(c.tokens, c.components, c.combined) for c in back[i]] == \
               [(c.tokens, c.components, c.combined) for c in nbs[i]]
    line = (tmp_path / "n.txt").read_text().splitlines()[0]
    assert line.count(" ||| ") == 3


def test_nbest_file_bad_line(tmp_path):
    (tmp_path / "n.txt").write_text("0 ||| x ||| 1 2 ||| 3\n")
    with pytest.raises(FormatError):
        read_nbest(tmp_path / "n.txt")


def test_weights_file_round_trip(tmp_path):
    w = WeightVector(0.25, -1.5, 3.0, 1e-3)
    w.save(tmp_path / "w.txt")
    assert "lambda_tm=0.25" in (tmp_path / "w.txt").read_text()
    assert WeightVector.load(tmp_path / "w.txt") == w
