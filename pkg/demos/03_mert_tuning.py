"""Tune the four log-linear weights on the dev set with MERT.

Untuned weights let the language model shuffle words; tuning learns that the
distortion penalty deserves more weight on this corpus.

Run: python3 demos/03_mert_tuning.py
"""

from xiangsheng.corpus import extract_pairs, filter_pairs, load_corpus, load_lexicon, split
from xiangsheng.evaluation import bleu
from xiangsheng.pipeline import PipelineConfig, build_generator, tune_generator
from xiangsheng.synthetic import DATA_DIR

turns = load_corpus(DATA_DIR / "corpus.jsonl")
pairs, _ = extract_pairs(turns, load_lexicon(DATA_DIR / "segmentation_lexicon.txt"))
parts = split(filter_pairs(pairs), test_size=100, dev_size=50, seed=7)

gen = build_generator(parts.train, PipelineConfig(beam_width=50))
refs = [p.reference for p in parts.test]

before = bleu([gen.respond(p.source)[0] for p in parts.test], refs)
result = tune_generator(gen, parts.dev, seed=5, restarts=8)
after = bleu([gen.respond(p.source)[0] for p in parts.test], refs)

print(f"dev BLEU-4 during tuning: {result.initial_bleu:.2f} -> {result.bleu:.2f}")
w = result.weights
print(f"weights: tm={w.tm:.3f} ds={w.ds:.3f} lm={w.lm:.3f} hm={w.hm:.3f}")
print(f"test BLEU-4 with the untuned weights {before[4]:.2f}, after tuning {after[4]:.2f}")
print("each restart's corpus BLEU by outer iteration (never decreasing):")
for h in result.histories[:3]:
    print("   " + " ".join(f"{v:.1f}" for v in h))
