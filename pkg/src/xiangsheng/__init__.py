"""Crosstalk response generation as monolingual statistical translation.

A dougen utterance is "translated" into a penggen response with a word
translation table and distortion model, a 4-gram language model and a
random-forest humor score, combined log-linearly and tuned by MERT on
BLEU-4.  Retrieval and random baselines and the BLEU/rating evaluators
are included for comparison.
"""

from .corpus import UtterancePair, extract_pairs, filter_pairs, load_corpus, read_pairs, split
from .decoder import NBestList, WeightVector, decode_nbest, rerank_top5
from .errors import ConfigError, DataError, FormatError, StructureError, XiangshengError
from .evaluation import bleu, rating_ratios
from .humor import HumorForest, HumorScorer, extract_features, train_forest
from .language_model import NGramModel, train_lm
from .mert import mert, tune
from .pipeline import PipelineConfig, ResponseGenerator, build_generator, tune_generator
from .translation_model import TranslationTable, estimate_phi, train_alignment

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "FormatError", "HumorForest", "HumorScorer", "NBestList",
    "NGramModel", "PipelineConfig", "ResponseGenerator", "StructureError", "TranslationTable",
    "UtterancePair", "WeightVector", "XiangshengError", "bleu", "build_generator",
    "decode_nbest", "estimate_phi", "extract_features", "extract_pairs", "filter_pairs",
    "load_corpus", "mert", "rating_ratios", "read_pairs", "rerank_top5", "split",
    "train_alignment", "train_forest", "train_lm", "tune", "tune_generator",
]
