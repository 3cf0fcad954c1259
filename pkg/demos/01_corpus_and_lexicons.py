"""From dialogue turns to training pairs, and what the humor lexicons see.

Run: python3 demos/01_corpus_and_lexicons.py
"""

from xiangsheng.corpus import extract_pairs, filter_pairs, load_corpus, load_lexicon, split
from xiangsheng.humor import FEATURE_NAMES, extract_features
from xiangsheng.lexicons import is_homophone, load_lexicons, same_rhyme
from xiangsheng.synthetic import DATA_DIR

turns = load_corpus(DATA_DIR / "corpus.jsonl")
print(f"The bundled toy corpus has {len(turns)} turns. The first dialogue opens with:")
for t in turns[:4]:
    print(f"  [{t.role:7s}] {t.text}")

# Each dougen turn followed by a penggen turn becomes one (input, response) pair.
pairs, stats = extract_pairs(turns, load_lexicon(DATA_DIR / "segmentation_lexicon.txt"))
pairs = filter_pairs(pairs, max_response_words=60, min_response_words=2)
print(f"\n{stats.pairs} pairs extracted ({stats.dropped} unpaired turns), {len(pairs)} kept.")

parts = split(pairs, test_size=100, dev_size=50, seed=7)
print(f"Split with seed 7: {len(parts.train)} train, {len(parts.dev)} dev, {len(parts.test)} test.")

lex = load_lexicons(DATA_DIR / "lexicons")
print("\nPhonetic relations come from the pinyin table:")
print("  猪 / 注 homophones?", is_homophone("猪", "注", lex.pinyin))
print("  花 / 瓜 rhyme?     ", same_rhyme("花", "瓜", lex.pinyin))

turn_in, turn_out = ["猪", "尾"], ["注", "意", "高", "低", "吧"]
feats = extract_features(turn_in, turn_out, lex)
print(f"\nHumor features for {''.join(turn_in)} -> {''.join(turn_out)}:")
for name, value in zip(FEATURE_NAMES, feats):
    if value:
        print(f"  {name:22s} {value:.3f}")
