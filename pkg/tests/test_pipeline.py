import pytest

from xiangsheng.corpus import UtterancePair
from xiangsheng.decoder import WeightVector
from xiangsheng.errors import ConfigError, FormatError
from xiangsheng.pipeline import (
    CONFIG_ENV, PipelineConfig, build_generator, dialogue_contexts, run_baseline,
    tune_generator,
)


def P(src, ref, dialogue="d", turn=0):
    return UtterancePair(tuple(src.split()), tuple(ref.split()), dialogue, turn)


CIPHER = {"a": "x", "b": "y", "c": "z", "d": "w"}


def cipher_pairs():
    sents = ["a b", "b c", "c d", "a c d", "d b a", "b a", "c a b", "d d c"]
    return [P(s, " ".join(CIPHER[w] for w in s.split()), f"d{i}", 0)
            for i, s in enumerate(sents)]


def test_default_values():
    cfg = PipelineConfig()
    assert (cfg.beam_width, cfg.rerank_depth, cfg.test_size, cfg.dev_size,
            cfg.max_response_words) == (100, 5, 2000, 4000, 60)
    assert cfg.weights == WeightVector(1, 1, 1, 1)


def test_rerank_depth_bounded_by_beam():
    with pytest.raises(ConfigError):
        PipelineConfig(beam_width=4, rerank_depth=5)


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nbeam-width = 50\nalpha=0.5\nlambda_hm=0.25\n")
    cfg = PipelineConfig.from_file(path, beam_width=20, seed=None)
    assert cfg.beam_width == 20 and cfg.alpha == 0.5 and cfg.lambda_hm == 0.25
    path.write_text("colour=red\n")
    with pytest.raises(FormatError):
        PipelineConfig.from_file(path)
    path.write_text("beam_width=many\n")
    with pytest.raises(FormatError):
        PipelineConfig.from_file(path)


def test_config_from_env(tmp_path, monkeypatch):
    (tmp_path / "c.cfg").write_text("trees=7\n")
    monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "c.cfg"))
    assert PipelineConfig.from_env().trees == 7
    monkeypatch.delenv(CONFIG_ENV)
    assert PipelineConfig.from_env(trees=3).trees == 3


def test_generator_learns_cipher():
    gen = build_generator(cipher_pairs(), PipelineConfig(beam_width=20))
    tokens, nb = gen.respond(("a", "b", "c"))
    # equal weights let the LM reorder toward the seen "z x y"
    assert sorted(tokens) == ["x", "y", "z"]
    gen.weights = WeightVector(1, 5, 1, 0)
    tokens, nb = gen.respond(("a", "b", "c"))
    assert tokens == ("x", "y", "z")
    assert nb.best.tokens == tokens


def test_echo_fallback():
    gen = build_generator(cipher_pairs(), PipelineConfig(beam_width=20))
    tokens, nb = gen.respond(("q", "r"))
    assert tokens == ("q", "r") and len(nb) == 0 and nb.diagnostic


def test_tune_generator_improves_or_keeps():
    pairs = cipher_pairs()
    gen = build_generator(pairs, PipelineConfig(beam_width=20, lambda_ds=-3.0))
    result = tune_generator(gen, pairs[:5], seed=0, restarts=2, redecode_rounds=1)
    assert result.bleu >= result.initial_bleu
    assert gen.weights == result.weights


def test_dialogue_contexts():
    pairs = [P("u0", "r0", "d", 0), P("u2", "r2", "d", 2), P("u4", "r4", "d", 4),
             P("v0", "s0", "e", 0)]
    ctx = dialogue_contexts(pairs, pairs)
    assert ctx[0] == []
    assert ctx[1] == [("u0",), ("r0",)]
    assert ctx[2] == [("r0",), ("u2",), ("r2",)]
    assert ctx[3] == []


def test_run_baseline_methods():
    pairs = cipher_pairs()
    assert run_baseline("ir-uu", pairs, pairs[:2]) == [pairs[0].reference, pairs[1].reference]
    assert len(run_baseline("ir-cxt", pairs, pairs[:3])) == 3
    assert run_baseline("rnd", pairs, pairs, seed=3) == run_baseline("rnd", pairs, pairs, seed=3)
    with pytest.raises(ConfigError):
        run_baseline("rnd", pairs, pairs)
    with pytest.raises(ConfigError):
        run_baseline("bm25", pairs, pairs)
