"""Command-line front end: ``xiangsheng <subcommand> ...``.

Every subcommand reads and writes the plain-text formats owned by the
library modules, so artifacts can be produced by one step and consumed by
the next.  Numeric defaults come from a ``key=value`` config file
(``--config`` or the ``XIANGSHENG_CONFIG`` variable), and explicit flags
win over the file.

Exit status: 0 success, 2 usage, 3 missing file, 4 malformed input,
5 structural violation, 6 unusable data, 7 bad configuration, 1 anything
unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .baselines import RetrievalIndex, ir_cxt, ir_uu, ir_ur, rnd
from .decoder import NBestList, WeightVector, format_nbest, read_nbest, rerank_top5
from .errors import ConfigError, DataError, FormatError, StructureError
from .evaluation import (
    bleu, format_bleu_table, format_ratio_table, rating_ratios, read_ratings, read_token_lines,
    report_json,
)
from .humor import HumorForest, HumorScorer, read_labeled, rebalance, train_forest
from .language_model import NGramModel, train_lm
from .lexicons import Lexicons, load_lexicons
from .mert import instances_from_nbest, tune
from .pipeline import PipelineConfig, ResponseGenerator, dialogue_contexts, train_translation_table
from .translation_model import TranslationTable

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_FORMAT = 4
EXIT_STRUCTURE = 5
EXIT_DATA = 6
EXIT_CONFIG = 7

log = logging.getLogger("xiangsheng")


class UsageError(Exception):
    pass


# --- helpers ------------------------------------------------------------------

def _pick(flag, default):
    return default if flag is None else flag


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(line + "\n" for line in lines)


def read_sources(path) -> list[tuple[str, ...]]:
    """Input utterances from a pairs JSONL file or a one-utterance-per-line file."""
    if str(path).endswith(".jsonl"):
        return [p.source for p in corpus_mod.read_pairs(path)]
    return [tuple(t) for t in read_token_lines(path)]


def read_references(path) -> list[tuple[str, ...]]:
    if str(path).endswith(".jsonl"):
        return [p.reference for p in corpus_mod.read_pairs(path)]
    return [tuple(t) for t in read_token_lines(path)]


def _load_generator(args, cfg: PipelineConfig, with_humor=True) -> ResponseGenerator:
    table = TranslationTable.load(args.tm, alpha=args.alpha)
    lm = NGramModel.load(args.lm)
    humor = None
    if with_humor and getattr(args, "humor", None):
        lexicons = load_lexicons(args.lexicons) if args.lexicons else Lexicons()
        humor = HumorScorer(HumorForest.load(args.humor), lexicons)
    weights = WeightVector.load(args.weights) if getattr(args, "weights", None) else cfg.weights
    gen = ResponseGenerator.from_config(cfg, table, lm, humor, weights)
    gen.beam_width = _pick(getattr(args, "beam", None), cfg.beam_width)
    return gen


# Worker-side state for --jobs: the generator is installed once per process.
_WORKER_GEN: ResponseGenerator | None = None


def _init_worker(gen):
    global _WORKER_GEN
    _WORKER_GEN = gen


def _nbest_worker(source):
    return _WORKER_GEN.nbest(source)


def decode_all(gen: ResponseGenerator, sources, jobs: int = 1) -> list[NBestList]:
    """N-best lists for every source, in input order, optionally across processes."""
    if jobs <= 1 or len(sources) < 2:
        return [gen.nbest(s) for s in sources]
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(gen,)) as pool:
        return list(pool.map(_nbest_worker, sources, chunksize=max(1, len(sources) // (4 * jobs))))


def _final_response(source, nb: NBestList, depth: int, rerank: bool, index: int):
    if not nb.candidates:
        log.warning("input %d: %s; echoing the input back", index, nb.diagnostic or "no candidate")
        return tuple(source)
    return rerank_top5(nb, depth).tokens if rerank else nb.best.tokens


# --- subcommands --------------------------------------------------------------

def cmd_segment(args, cfg):
    turns = corpus_mod.load_corpus(args.input)
    lexicon = corpus_mod.load_lexicon(args.lexicon) if args.lexicon else frozenset()
    pairs, stats = corpus_mod.extract_pairs(turns, lexicon)
    kept = corpus_mod.filter_pairs(pairs, _pick(args.max_words, cfg.max_response_words),
                                   _pick(args.min_words, cfg.min_response_words))
    corpus_mod.write_pairs(kept, args.output)
    log.info("%d pairs extracted, %d turns unpaired, %d kept after filtering",
             stats.pairs, stats.dropped, len(kept))


def cmd_split(args, cfg):
    pairs = corpus_mod.read_pairs(args.pairs)
    parts = corpus_mod.split(pairs, _pick(args.test, cfg.test_size),
                             _pick(args.dev, cfg.dev_size), args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("train", "dev", "test"):
        corpus_mod.write_pairs(getattr(parts, name), out / f"{name}.jsonl")
    log.info("train %d, dev %d, test %d", len(parts.train), len(parts.dev), len(parts.test))


def cmd_train_tm(args, cfg):
    pairs = corpus_mod.read_pairs(args.train)
    if not pairs:
        raise DataError("training file holds no pairs")
    table = train_translation_table(pairs, _pick(args.iterations, cfg.em_iterations),
                                    _pick(args.alpha, cfg.alpha))
    table.save(args.output)


def cmd_train_lm(args, cfg):
    sentences = [p.reference for p in corpus_mod.read_pairs(args.train)] if args.train else []
    for extra in args.extra or ():
        sentences += [tuple(t) for t in read_token_lines(extra) if t]
    lm = train_lm(sentences, _pick(args.order, cfg.lm_order), _pick(args.mu, cfg.lm_mu))
    lm.save(args.output)


def cmd_train_humor(args, cfg):
    lexicons = load_lexicons(args.lexicons) if args.lexicons else Lexicons()
    X, y = read_labeled(args.data, lexicons)
    if not args.no_rebalance:
        X, y = rebalance(X, y, seed=args.seed)
    forest = train_forest(X, y, _pick(args.trees, cfg.trees), _pick(args.max_depth, cfg.max_depth),
                          seed=args.seed)
    forest.save(args.output)
    acc = float(np.mean((forest.predict_proba(X) > 0.5) == y))
    log.info("%d examples, training accuracy %.3f", len(y), acc)


def cmd_decode(args, cfg):
    gen = _load_generator(args, cfg)
    sources = read_sources(args.input)
    nbests = decode_all(gen, sources, args.jobs)
    with open(args.nbest, "w", encoding="utf-8", newline="\n") as fh:
        for i, nb in enumerate(nbests):
            fh.write(format_nbest(i, nb))
    if args.output:
        rerank = args.rerank and gen.humor is not None
        _write_lines(args.output, [" ".join(_final_response(s, nb, gen.rerank_depth, rerank, i))
                                   for i, (s, nb) in enumerate(zip(sources, nbests))])


def cmd_rerank(args, cfg):
    sources = read_sources(args.input)
    nbests = read_nbest(args.nbest)
    depth = _pick(args.top, cfg.rerank_depth)
    if depth < 1:
        raise ConfigError("--top must be at least 1")
    lines = []
    for i, s in enumerate(sources):
        nb = nbests.get(i, NBestList(diagnostic="no candidate in the n-best file"))
        lines.append(" ".join(_final_response(s, nb, depth, True, i)))
    _write_lines(args.output, lines)


def cmd_tune(args, cfg):
    init = WeightVector.load(args.init) if args.init else cfg.weights
    restarts = _pick(args.restarts, cfg.mert_restarts)
    if args.nbest:
        if not args.ref:
            raise UsageError("--nbest needs --ref")
        instances = instances_from_nbest(read_nbest(args.nbest), read_references(args.ref))
        result = tune(instances, init, seed=args.seed, restarts=restarts)
    else:
        if not (args.dev and args.tm and args.lm):
            raise UsageError("tune needs either --nbest/--ref or --dev with --tm and --lm")
        from .pipeline import tune_generator
        args.weights = args.init
        gen = _load_generator(args, cfg)
        result = tune_generator(gen, corpus_mod.read_pairs(args.dev), args.seed, restarts,
                                args.redecode)
        if result is None:
            raise DataError("no dev sentence produced a candidate")
    result.weights.save(args.output)
    log.info("dev BLEU-4 %.4f -> %.4f", result.initial_bleu, result.bleu)


def _bleu_worker(pair):
    from .evaluation import BleuStats
    return BleuStats.from_sentence(*pair).as_vector()


def cmd_evaluate(args, cfg):
    results = {}
    ratios = None
    if args.hyp:
        if not args.ref:
            raise UsageError("--hyp needs --ref")
        refs = read_references(args.ref)
        for spec in args.hyp:
            name, sep, path = spec.partition("=")
            if not sep:
                name, path = Path(spec).stem, spec
            hyps = read_references(path)
            if len(hyps) != len(refs):
                raise DataError(f"{path}: {len(hyps)} hypotheses but {len(refs)} references")
            if args.jobs > 1:
                from .evaluation import bleu_from_vector
                with ProcessPoolExecutor(args.jobs) as pool:
                    total = sum(pool.map(_bleu_worker, zip(hyps, refs), chunksize=64))
                results[name] = {n: bleu_from_vector(total, n) for n in range(1, 5)}
            else:
                results[name] = bleu(hyps, refs)
        sys.stdout.write(format_bleu_table(results))
    if args.ratings:
        if not args.baseline_system:
            raise UsageError("--ratings needs --baseline-system")
        ratios = rating_ratios(read_ratings(args.ratings), args.baseline_system)
        sys.stdout.write(format_ratio_table(ratios))
    if not args.hyp and not args.ratings:
        raise UsageError("nothing to evaluate: give --hyp/--ref and/or --ratings")
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json(results or None, ratios))


_BASELINE_INDEX: RetrievalIndex | None = None


def _init_baseline(index):
    global _BASELINE_INDEX
    _BASELINE_INDEX = index


def _retrieve(job):
    method, query, context = job
    if method == "ir-ur":
        return ir_ur(query, _BASELINE_INDEX).tokens
    if method == "ir-uu":
        return ir_uu(query, _BASELINE_INDEX).tokens
    return ir_cxt(query, context, _BASELINE_INDEX).tokens


def cmd_baseline(args, cfg):
    pool = [p for path in args.pool for p in corpus_mod.read_pairs(path)]
    queries = corpus_mod.read_pairs(args.queries)
    index = RetrievalIndex(pool, args.weighting)
    if args.method == "rnd":
        seed = _pick(args.seed, cfg.seed)
        if seed is None:
            raise UsageError("the rnd baseline requires --seed")
        rng = np.random.default_rng(seed)
        out = [rnd(q.source, index, rng).tokens for q in queries]
    else:
        contexts = (dialogue_contexts(pool + queries, queries) if args.method == "ir-cxt"
                    else [[] for _ in queries])
        jobs = [(args.method, q.source, c) for q, c in zip(queries, contexts)]
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs, initializer=_init_baseline,
                                     initargs=(index,)) as ex:
                out = list(ex.map(_retrieve, jobs, chunksize=64))
        else:
            _init_baseline(index)
            out = [_retrieve(j) for j in jobs]
    _write_lines(args.output, [" ".join(t) for t in out])


def cmd_repl(args, cfg, stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    gen = _load_generator(args, cfg)
    lexicon = corpus_mod.load_lexicon(args.segmentation) if args.segmentation else frozenset()
    interactive = stdin.isatty()
    while True:
        if interactive:
            stdout.write("dougen> ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        tokens = corpus_mod.segment(line.strip(), lexicon)
        if not tokens:
            continue
        nb = gen.nbest(tokens)
        response = _final_response(tokens, nb, gen.rerank_depth, gen.humor is not None, 0)
        stdout.write(" ".join(response) + "\n")
        if args.verbose:
            for c in nb.candidates[:gen.rerank_depth]:
                stdout.write("  %-30s tm=%.3f ds=%.3f lm=%.3f hm=%.3f score=%.3f\n"
                             % (" ".join(c.tokens), *c.components, c.combined))
        stdout.flush()


# --- argument parsing ---------------------------------------------------------

def _model_args(p, humor=True):
    p.add_argument("--tm", required=True, help="translation table file")
    p.add_argument("--lm", required=True, help="language model count file")
    p.add_argument("--alpha", type=float, help="override the table's distortion base")
    if humor:
        p.add_argument("--humor", help="humor forest file (enables p_hm and reranking)")
        p.add_argument("--lexicons", help="lexicon directory for humor features")
    p.add_argument("--beam", type=int, help="beam width / n-best size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xiangsheng",
                                     description="Crosstalk response generation pipeline.")
    parser.add_argument("--config", help="key=value config file (default: $XIANGSHENG_CONFIG)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only print warnings")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("segment", help="turn a dialogue corpus into filtered pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--lexicon", help="segmentation word list")
    p.add_argument("--output", required=True)
    p.add_argument("--max-words", type=int)
    p.add_argument("--min-words", type=int)

    p = sub.add_parser("split", help="random test/dev/train split")
    p.add_argument("--pairs", required=True)
    p.add_argument("--test", type=int)
    p.add_argument("--dev", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train-tm", help="alignment + translation table")
    p.add_argument("--train", required=True)
    p.add_argument("--iterations", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--output", required=True)

    p = sub.add_parser("train-lm", help="interpolated n-gram language model")
    p.add_argument("--train", help="pairs JSONL; responses are used")
    p.add_argument("--extra", action="append", help="extra tokenized sentences, one per line")
    p.add_argument("--order", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--output", required=True)

    p = sub.add_parser("train-humor", help="random-forest humor classifier")
    p.add_argument("--data", required=True, help="labeled TSV (raw text or features)")
    p.add_argument("--lexicons")
    p.add_argument("--trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--no-rebalance", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("decode", help="n-best decoding of input utterances")
    _model_args(p)
    p.add_argument("--weights", help="weights file from tune")
    p.add_argument("--input", required=True, help="pairs JSONL or one utterance per line")
    p.add_argument("--nbest", required=True, help="n-best output file")
    p.add_argument("--output", help="also write final responses here")
    p.add_argument("--no-rerank", dest="rerank", action="store_false")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("rerank", help="pick final responses from an n-best file by p_hm")
    p.add_argument("--nbest", required=True)
    p.add_argument("--input", required=True, help="the decoded inputs (for the echo fallback)")
    p.add_argument("--top", type=int)
    p.add_argument("--output", required=True)

    p = sub.add_parser("tune", help="MERT on a dev set")
    p.add_argument("--nbest", help="fixed n-best file to tune on")
    p.add_argument("--ref", help="references for --nbest")
    p.add_argument("--dev", help="dev pairs to decode and tune on")
    p.add_argument("--tm")
    p.add_argument("--lm")
    p.add_argument("--alpha", type=float)
    p.add_argument("--humor")
    p.add_argument("--lexicons")
    p.add_argument("--beam", type=int)
    p.add_argument("--init", help="initial weights file")
    p.add_argument("--restarts", type=int)
    p.add_argument("--redecode", type=int, default=0, help="extra decode-and-merge rounds")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("evaluate", help="corpus BLEU and rating ratios")
    p.add_argument("--hyp", action="append", help="hypothesis file, optionally NAME=PATH")
    p.add_argument("--ref")
    p.add_argument("--ratings")
    p.add_argument("--baseline-system")
    p.add_argument("--json")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("baseline", help="retrieval or random responses")
    p.add_argument("--method", required=True, choices=["ir-ur", "ir-uu", "ir-cxt", "rnd"])
    p.add_argument("--pool", required=True, action="append", help="pool pairs (repeatable)")
    p.add_argument("--queries", required=True)
    p.add_argument("--weighting", choices=["tfidf", "tf"], default="tfidf")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("repl", help="interactive responses")
    _model_args(p)
    p.add_argument("--weights")
    p.add_argument("--segmentation", help="segmentation word list for typed input")
    p.add_argument("--verbose", action="store_true")
    return parser


COMMANDS = {
    "segment": cmd_segment, "split": cmd_split, "train-tm": cmd_train_tm,
    "train-lm": cmd_train_lm, "train-humor": cmd_train_humor, "decode": cmd_decode,
    "rerank": cmd_rerank, "tune": cmd_tune, "evaluate": cmd_evaluate,
    "baseline": cmd_baseline, "repl": cmd_repl,
}


def _load_config(path) -> PipelineConfig:
    if path:
        if not Path(path).exists():
            raise FileNotFoundError(path)
        return PipelineConfig.from_file(path)
    return PipelineConfig.from_env()


def _setup_logging(quiet: bool) -> None:
    # one handler bound to the current stderr, replaced on every call
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    _setup_logging(args.quiet)
    try:
        cfg = _load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename or exc)
        return EXIT_MISSING
    except FormatError as exc:
        log.error("%s", exc)
        return EXIT_FORMAT
    except StructureError as exc:
        log.error("%s", exc)
        return EXIT_STRUCTURE
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return 130
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
