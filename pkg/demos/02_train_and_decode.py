"""Train the translation table, language model and humor forest, then decode.

Run: python3 demos/02_train_and_decode.py
"""

from xiangsheng.corpus import extract_pairs, filter_pairs, load_corpus, load_lexicon, split
from xiangsheng.humor import read_labeled, rebalance, train_forest
from xiangsheng.lexicons import load_lexicons
from xiangsheng.pipeline import PipelineConfig, build_generator
from xiangsheng.synthetic import DATA_DIR

turns = load_corpus(DATA_DIR / "corpus.jsonl")
pairs, _ = extract_pairs(turns, load_lexicon(DATA_DIR / "segmentation_lexicon.txt"))
parts = split(filter_pairs(pairs), test_size=100, dev_size=50, seed=7)

lexicons = load_lexicons(DATA_DIR / "lexicons")
X, y = read_labeled(DATA_DIR / "humor.tsv", lexicons)
print(f"Humor data: {int(y.sum())} humorous of {len(y)}; rebalancing before training.")
X, y = rebalance(X, y, seed=3)
forest = train_forest(X, y, trees=50, seed=3)

gen = build_generator(parts.train, PipelineConfig(beam_width=50), forest=forest,
                      lexicons=lexicons)
row = gen.table.phi["天"]
print("\nAfter EM alignment, the table has learned the cipher. phi(. | 天):")
for word, p in sorted(row.items(), key=lambda kv: -kv[1])[:3]:
    print(f"  {word}  {p:.3f}")

source = parts.test[0].source
tokens, nbest = gen.respond(source)
print(f"\nInput      {' '.join(source)}")
print(f"Reference  {' '.join(parts.test[0].reference)}")
print("Top candidates with untuned weights (all 1):")
for c in nbest.candidates[:5]:
    print(f"  {' '.join(c.tokens):20s} tm={c.tm:7.2f} ds={c.ds:6.2f} lm={c.lm:7.2f} "
          f"p_hm={c.humor:.2f}  score={c.combined:7.2f}")
print(f"Reranked by humor among the top 5: {' '.join(tokens)}")
