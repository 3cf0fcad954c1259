import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from xiangsheng.errors import DataError, FormatError
from xiangsheng.language_model import (
    BOS, EOS, UNK, NGramModel, lm_log_prob, train_lm,
)

TOY = [("a", "b"), ("a", "c")]


def test_counts():
    m = train_lm(TOY)
    assert m.counts[1][("a",)] == 2
    assert m.counts[2][("a", "b")] == 1
    assert m.counts[4][(BOS, BOS, BOS, "a")] == 2
    assert m.vocab == {"a", "b", "c", EOS}


def test_single_sentence_padding():
    m = train_lm([("a",)])
    assert m.counts[2][("a", EOS)] == 1
    assert m.counts[4][(BOS, BOS, "a", EOS)] == 1


def test_empty_training_set():
    with pytest.raises(DataError):
        train_lm([])


def test_history_counts_dominate():
    m = train_lm([("a", "b", "a", "b", "c"), ("b", "a")])
    for n in range(2, m.order + 1):
        for gram, c in m.counts[n].items():
            assert c <= m.context_counts[n][gram[:-1]]
            assert c <= m.counts[n - 1][gram[:-1]] or gram[:-1][-1] == BOS


def test_bigram_hand_value():
    m = train_lm(TOY, order=2, mu=0.75)
    # V = {a, b, c, </s>} so the floor is 1/5; unigram ML p(b) = 1/6; bigram ML p(b|a) = 1/2
    expected = 0.75 * 0.5 + 0.25 * (0.75 * (1 / 6) + 0.25 * (1 / 5))
    assert m.prob("b", ("a",)) == pytest.approx(expected, abs=1e-15)


def test_unseen_history_falls_to_uniform_when_unigram_off():
    m = train_lm(TOY, order=4, mu=(0.0, 0.75, 0.75, 0.75))
    assert m.log_prob_word("zzz", ("q", "r", "s")) == pytest.approx(math.log(1 / 5))


def test_oov_default_mu():
    m = train_lm(TOY)
    assert m.prob("zzz", ("q", "r", "s")) == pytest.approx(0.25 / 5)
    assert m.prob("zzz") == m.prob(UNK)


def test_empty_sequence_scores_end_only():
    m = train_lm(TOY)
    assert lm_log_prob(m, []) == pytest.approx(m.log_prob_word(EOS, (BOS, BOS, BOS)))


def test_effective_weights_sum_to_one():
    m = train_lm(TOY)
    w = m.effective_weights()
    assert len(w) == 5
    assert abs(sum(w) - 1.0) <= 1e-12
    assert w[0] == 0.75


def _normalization_gap(m, history):
    support = sorted(m.vocab) + [UNK]
    return abs(math.fsum(m.prob(w, history) for w in support) - 1.0)


def test_normalization_sampled_histories():
    rng = random.Random(0)
    words = ["a", "b", "c", "d"]
    corpus = [tuple(rng.choice(words) for _ in range(rng.randint(1, 6))) for _ in range(30)]
    m = train_lm(corpus)
    pool = words + ["oov", BOS]
    for _ in range(200):
        h = tuple(rng.choice(pool) for _ in range(3))
        assert _normalization_gap(m, h) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abc"), max_size=5), min_size=1, max_size=8),
       st.lists(st.sampled_from(["a", "b", "c", "x", BOS]), min_size=0, max_size=3),
       st.integers(1, 4))
def test_normalization_property(corpus, history, order):
    m = train_lm(corpus, order=order)
    assert _normalization_gap(m, tuple(history)) <= 1e-6


def test_more_data_does_not_lower_p():
    base = train_lm(TOY)
    more = train_lm(TOY + [("a", "b")])
    assert more.prob("b", (BOS, BOS, "a")) >= base.prob("b", (BOS, BOS, "a"))


@given(st.lists(st.sampled_from(["a", "b", "c", "zz"]), max_size=8))
def test_scores_finite(tokens):
    m = train_lm(TOY)
    lp = lm_log_prob(m, tokens)
    assert math.isfinite(lp) and lp < 0


def test_round_trip(tmp_path):
    m = train_lm([("猪", "尾巴"), ("注意", "吧", "吧")], mu=(0.5, 0.6, 0.7, 0.8))
    m.save(tmp_path / "lm.counts")
    m2 = NGramModel.load(tmp_path / "lm.counts")
    assert m2.order == m.order and m2.mu == m.mu and m2.vocab == m.vocab
    assert all(m.counts[n] == m2.counts[n] for n in range(1, 5))
    assert lm_log_prob(m2, ["注意", "吧"]) == lm_log_prob(m, ["注意", "吧"])


def test_load_rejects_bad_header(tmp_path):
    (tmp_path / "lm").write_text("hello\n")
    with pytest.raises(FormatError):
        NGramModel.load(tmp_path / "lm")
