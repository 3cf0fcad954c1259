import numpy as np
import pytest

from oracles import corpus_bleu_direct
from xiangsheng.decoder import Candidate, NBestList, WeightVector
from xiangsheng.errors import DataError
from xiangsheng.mert import (
    TuningInstance, corpus_bleu, instances_from_nbest, line_search, mert,
    select_by_interval, tune, upper_envelope,
)

VOCAB = [f"v{i}" for i in range(6)]


def noisy_copy(rng, ref):
    out = list(ref)
    for _ in range(int(rng.integers(0, 4))):
        op = rng.integers(0, 3)
        if op == 0 and len(out) > 1:
            out.pop(int(rng.integers(len(out))))
        elif op == 1:
            out[int(rng.integers(len(out)))] = str(rng.choice(VOCAB))
        else:
            out.insert(int(rng.integers(len(out) + 1)), str(rng.choice(VOCAB)))
    return out


def random_instances(rng, n_sent, n_cand, ref_len=8):
    insts = []
    for _ in range(n_sent):
        ref = [str(t) for t in rng.choice(VOCAB, size=ref_len)]
        cands = [noisy_copy(rng, ref) for _ in range(n_cand)]
        insts.append(TuningInstance.from_candidates(ref, cands, rng.normal(size=(n_cand, 4))))
    return insts


def bleu_at(instances, w):
    """Corpus BLEU-4 with the top-1 picked by plain argmax (direct computation)."""
    hyps = [inst.candidates[int(np.argmax(inst.features @ w))] for inst in instances]
    return corpus_bleu_direct(hyps, [inst.reference for inst in instances])


def grid_bleu(instances, w, coord, grid):
    """BLEU of the argmax selection at every grid value of one coordinate."""
    refs = [inst.reference for inst in instances]
    winners = []
    for inst in instances:
        base = inst.features @ w - w[coord] * inst.features[:, coord]
        scores = base[None, :] + grid[:, None] * inst.features[None, :, coord]
        winners.append(np.argmax(scores, axis=1))
    cache = {}
    out = np.empty(len(grid))
    for i, combo in enumerate(zip(*winners)):
        if combo not in cache:
            hyps = [inst.candidates[k] for inst, k in zip(instances, combo)]
            cache[combo] = corpus_bleu_direct(hyps, refs)
        out[i] = cache[combo]
    return out


# --- select_by_interval ---

def test_select_no_threshold():
    assert select_by_interval([], [7.0]) == 0.0


def test_select_midpoint():
    assert select_by_interval([0.0, 2.0], [1.0, 5.0, 1.0]) == 1.0


def test_select_tie_prefers_smaller():
    assert select_by_interval([0.0, 2.0, 4.0], [1.0, 3.0, 3.0, 0.0]) == 1.0


def test_select_unbounded_ends():
    assert select_by_interval([1.0, 3.0], [5.0, 0.0, 0.0]) == -9.0
    assert select_by_interval([1.0, 3.0], [0.0, 0.0, 5.0]) == 13.0


def test_select_length_check():
    with pytest.raises(ValueError):
        select_by_interval([0.0], [1.0])


# --- envelope and line search ---

def test_upper_envelope_against_dense_evaluation():
    rng = np.random.default_rng(0)
    for _ in range(300):
        k = int(rng.integers(1, 7))
        a = rng.integers(-3, 4, size=k).astype(float)
        b = rng.integers(-3, 4, size=k).astype(float)
        hull = upper_envelope(a, b)
        xs = [x for x, _ in hull[1:]]
        assert xs == sorted(xs) and len(set(xs)) == len(xs)
        for x in np.linspace(-20, 20, 401):
            seg = max(i for i, (x0, _) in enumerate(hull) if x0 <= x)
            assert a[hull[seg][1]] + b[hull[seg][1]] * x == pytest.approx(np.max(a + b * x))


def test_line_search_matches_grid_oracle():
    rng = np.random.default_rng(42)
    grid = np.round(np.arange(-5.0, 5.0 + 1e-9, 0.001), 3)
    checked = 0
    while checked < 100:
        insts = random_instances(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        w = rng.normal(size=4)
        coord = int(rng.integers(4))
        thresholds, bleus = line_search(insts, w, coord)
        if not len(thresholds):
            continue
        x = select_by_interval(thresholds, bleus)
        trial = w.copy()
        trial[coord] = x
        values = grid_bleu(insts, w, coord, grid)
        best = values.max()
        assert bleu_at(insts, trial) >= best - 1e-9
        if -5 <= x <= 5:
            arg = grid[values >= best - 1e-9]
            assert np.min(np.abs(arg - x)) <= 0.001 + 1e-12
        checked += 1


def test_two_candidate_grid_example():
    rng = np.random.default_rng(7)
    insts = []
    for _ in range(5):
        ref = [str(t) for t in rng.choice(VOCAB, size=8)]
        good = list(ref)
        bad = [str(t) for t in rng.choice(["x", "y"], size=8)]
        # the better candidate has the larger first feature
        feats = [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]
        insts.append(TuningInstance.from_candidates(ref, [bad, good][::-1], feats))
    w0 = np.array([-1.0, 0.0, 0.0, 0.0])
    thresholds, bleus = line_search(insts, w0, 0)
    x = select_by_interval(thresholds, bleus)
    grid = np.round(np.arange(-5, 5.0001, 0.01), 2)
    vals = grid_bleu(insts, w0, 0, grid)
    assert bleu_at(insts, np.array([x, 0, 0, 0])) == vals.max() == 100.0
    assert x > 0


# --- full tuner ---

def test_tuning_never_lowers_dev_bleu():
    rng = np.random.default_rng(1)
    insts = random_instances(rng, 50, 10)
    result = tune(insts, WeightVector(), seed=3)
    assert result.bleu >= result.initial_bleu
    assert corpus_bleu(insts, result.weights) == pytest.approx(result.bleu)
    assert result.bleu == pytest.approx(bleu_at(insts, result.weights.as_array()))
    for history in result.histories:
        assert all(b >= a for a, b in zip(history, history[1:]))


def test_tuning_is_seeded():
    rng = np.random.default_rng(2)
    insts = random_instances(rng, 20, 6)
    assert mert(insts, seed=11) == mert(insts, seed=11)


def test_single_candidate_returns_init():
    rng = np.random.default_rng(3)
    insts = random_instances(rng, 10, 1)
    init = WeightVector(0.3, 0.2, 0.1, 0.4)
    assert mert(insts, init, seed=0) == init


def test_identical_candidates_return_init():
    rng = np.random.default_rng(4)
    insts = []
    for _ in range(6):
        ref = [str(t) for t in rng.choice(VOCAB, size=6)]
        hyp = noisy_copy(rng, ref)
        insts.append(TuningInstance.from_candidates(ref, [hyp] * 3, rng.normal(size=(3, 4))))
    assert mert(insts, WeightVector(), seed=0) == WeightVector()


def test_scaling_keeps_argmax():
    rng = np.random.default_rng(5)
    insts = random_instances(rng, 15, 5)
    for _ in range(20):
        w = rng.normal(size=4)
        assert corpus_bleu(insts, w) == corpus_bleu(insts, w * 4.2)


def test_empty_instances_rejected():
    with pytest.raises(DataError):
        tune([])


def test_instances_from_nbest_skips_infinite_rows():
    good = Candidate(("a", "b"), (), -1.0, 0.0, -2.0, 0.0, -3.0)
    bad = Candidate(("a",), (), float("-inf"), 0.0, -2.0, 0.0, float("-inf"))
    insts = instances_from_nbest({0: NBestList([good, bad]), 2: NBestList([bad])},
                                 [("a", "b"), ("c",), ("d",)])
    assert len(insts) == 1 and insts[0].candidates == [("a", "b")]
