"""Compare the tuned system with retrieval and random baselines, and compute rating ratios.

Run: python3 demos/04_baselines_and_bleu.py
"""

from xiangsheng.corpus import extract_pairs, filter_pairs, load_corpus, load_lexicon, split
from xiangsheng.evaluation import (
    RatingRecord, bleu, format_bleu_table, format_ratio_table, rating_ratios,
)
from xiangsheng.pipeline import (
    PipelineConfig, build_generator, dialogue_contexts, run_baseline, tune_generator,
)
from xiangsheng.synthetic import DATA_DIR

turns = load_corpus(DATA_DIR / "corpus.jsonl")
pairs, _ = extract_pairs(turns, load_lexicon(DATA_DIR / "segmentation_lexicon.txt"))
pairs = filter_pairs(pairs)
parts = split(pairs, test_size=100, dev_size=50, seed=7)
pool = parts.train + parts.dev
refs = [p.reference for p in parts.test]

gen = build_generator(parts.train, PipelineConfig(beam_width=50))
tune_generator(gen, parts.dev, seed=5)

results = {
    "SMT": bleu([gen.respond(p.source)[0] for p in parts.test], refs),
    "IR-UR": bleu(run_baseline("ir-ur", pool, parts.test), refs),
    "IR-UU": bleu(run_baseline("ir-uu", pool, parts.test), refs),
    "IR-CXT": bleu(run_baseline("ir-cxt", pool, parts.test,
                                contexts=dialogue_contexts(pairs, parts.test)), refs),
    "Rnd": bleu(run_baseline("rnd", pool, parts.test, seed=1), refs),
}
print("Corpus BLEU on 100 held-out cipher pairs:\n")
print(format_bleu_table(results))

# Ratings are per (system, aspect, item, rater); raters are averaged within an item first.
ratings = [RatingRecord("SMT", "entertainment", str(i), r, 1) for i in range(4) for r in "ab"]
ratings += [RatingRecord("SMT-H", "entertainment", str(i), r, s)
            for i, (r, s) in enumerate([("a", 2), ("a", 1), ("a", 1), ("a", 1)])]
print("Entertainment relative to SMT on a four-item toy rating sheet:\n")
print(format_ratio_table(rating_ratios(ratings, "SMT")))
