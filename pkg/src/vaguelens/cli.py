"""Command-line entry point covering the full pipeline headlessly.

Subcommands: ingest (documents -> corpus file + statistics table),
train (corpus -> checkpoint + metrics CSV + curves figure), export
(checkpoint + corpus -> trace file), match (headless pattern search,
TSV output + length-distribution figure), serve (local HTTP API + UI).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Flags override config-file values; config-file values override built-in
defaults.  Config files are plain ``key = value`` lines.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .corpus import (
    CorpusError,
    corpus_stats,
    format_stats_table,
    ingest as ingest_documents,
    load_corpus,
    preprocess,
    save_corpus,
)
from .explorer import DEFAULT_MAX_LEN, DEFAULT_TAU, DEFAULT_TOP_K, ExplorerError, QUERY_MODES
from .lexicon import LexiconError, load_lexicon
from .model import (
    GRU_VARIANTS,
    ModelConfig,
    ModelError,
    load_checkpoint,
    save_checkpoint,
)
from .server import ServerError, canonical_json, match_payload, run_server, select_payload
from .trace import TraceError, load_trace, trace_debug_json
from .training import TrainConfig, TrainingError, train, write_metrics_csv

logger = logging.getLogger(__name__)

DATA_ERRORS = (
    LexiconError,
    CorpusError,
    ModelError,
    TrainingError,
    TraceError,
    ExplorerError,
    ServerError,
    OSError,
    UnicodeDecodeError,
)

# Config-file keys and their types; flag values take precedence.
CONFIG_KEYS: dict[str, type] = {
    "vocab_size": int,
    "lexicon": str,
    "emb_dim": int,
    "hidden_dim": int,
    "fusion_dim": int,
    "max_len": int,
    "word_weight": float,
    "vague_weight": float,
    "gru_variant": str,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "rmsprop_decay": float,
    "rmsprop_epsilon": float,
    "seed": int,
    "shuffle": bool,
    "embeddings": str,
    "freeze_embeddings": bool,
    "holdout_fraction": float,
    "tau": float,
}


class CliError(ValueError):
    """Bad config file or option combination."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Parse ``key = value`` lines; blank lines and # comments ignored."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise CliError(
                f"{path}:{lineno}: unknown config key {key!r} "
                f"(known: {', '.join(sorted(CONFIG_KEYS))})"
            )
        cast = CONFIG_KEYS[key]
        try:
            if cast is bool:
                lowered = value.lower()
                if lowered in ("true", "yes", "1", "on"):
                    values[key] = True
                elif lowered in ("false", "no", "0", "off"):
                    values[key] = False
                else:
                    raise ValueError(f"not a boolean: {value!r}")
            else:
                values[key] = cast(value)
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _load_config(args: argparse.Namespace) -> dict[str, object]:
    if getattr(args, "config", None):
        return parse_config_file(args.config)
    return {}


def _resolve(args: argparse.Namespace, config: dict[str, object], name: str, default):
    """Flag > config file > default."""
    flag_value = getattr(args, name, None)
    if flag_value is not None:
        return flag_value
    if name in config:
        return config[name]
    return default


def build_parser() -> _Parser:
    parser = _Parser(prog="vaguelens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_ingest = sub.add_parser(
        "ingest", help="preprocess raw documents into a corpus file"
    )
    p_ingest.add_argument("--manifest", required=True, help="doc_id<TAB>path manifest file")
    p_ingest.add_argument("--lexicon", help="vague-term lexicon file (default: built-in)")
    p_ingest.add_argument("--out", required=True, help="output corpus file (VLCORP1)")
    p_ingest.add_argument("--vocab-size", type=int, dest="vocab_size",
                          help="vocabulary capacity (default 5000)")
    p_ingest.add_argument("--stats-out", help="also write the statistics table to this file")
    p_ingest.add_argument("--config", help="key=value config file")
    p_ingest.set_defaults(func=cmd_ingest)

    p_train = sub.add_parser("train", help="train the model on a corpus file")
    p_train.add_argument("--corpus", required=True, help="corpus file from ingest")
    p_train.add_argument("--out-model", required=True, help="output checkpoint file (VLMODEL1)")
    p_train.add_argument("--metrics", help="per-epoch metrics CSV path")
    p_train.add_argument("--config", help="key=value config file")
    p_train.add_argument("--epochs", type=int, help="training epochs (default 25)")
    p_train.add_argument("--batch-size", type=int, dest="batch_size", help="default 32")
    p_train.add_argument("--learning-rate", type=float, dest="learning_rate",
                         help="RMSProp learning rate (default 1e-3)")
    p_train.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p_train.add_argument("--embeddings", help="pre-trained embedding text file")
    p_train.add_argument("--emb-dim", type=int, dest="emb_dim",
                         help="embedding dimension (default 300)")
    p_train.add_argument("--hidden-dim", type=int, dest="hidden_dim",
                         help="GRU hidden dimension (default 512)")
    p_train.add_argument("--fusion-dim", type=int, dest="fusion_dim",
                         help="fusion vector dimension (default 200)")
    p_train.add_argument("--max-len", type=int, dest="max_len",
                         help="maximum tokens per sentence (default 50)")
    p_train.add_argument("--word-weight", type=float, dest="word_weight",
                         help="next-word loss weight (default 1)")
    p_train.add_argument("--vague-weight", type=float, dest="vague_weight",
                         help="vagueness loss weight (default 2)")
    p_train.add_argument("--gru-variant", choices=GRU_VARIANTS, dest="gru_variant",
                         help="GRU cell variant (default standard_reset)")
    p_train.add_argument("--checkpoint-every", type=int, default=0,
                         help="also write a checkpoint every K epochs")
    p_train.add_argument("--no-shuffle", action="store_true",
                         help="disable per-epoch shuffling")
    p_train.add_argument("--freeze-embeddings", action="store_true",
                         help="do not update the embedding table")
    p_train.add_argument("--holdout-fraction", type=float, dest="holdout_fraction",
                         help="report metrics on a held-out split of this size")
    p_train.add_argument("--no-plot", action="store_true",
                         help="skip the metrics figure next to the CSV")
    p_train.set_defaults(func=cmd_train)

    p_export = sub.add_parser("export", help="export per-token vectors to a trace file")
    p_export.add_argument("--model", required=True, help="checkpoint file from train")
    p_export.add_argument("--corpus", required=True, help="corpus file from ingest")
    p_export.add_argument("--out-trace", required=True, help="output trace file (VLTRACE1)")
    p_export.add_argument("--debug-json", help="also write a human-readable JSON dump")
    p_export.set_defaults(func=cmd_export)

    p_match = sub.add_parser("match", help="search a trace for similar activation regions")
    p_match.add_argument("--trace", required=True, help="trace file from export")
    p_match.add_argument("--span", nargs=2, type=int, required=True,
                         metavar=("START", "END"), help="phrase span (inclusive)")
    p_match.add_argument("--context", nargs=2, type=int, metavar=("START", "END"),
                         help="context span (default: the phrase span)")
    p_match.add_argument("--tau", type=float, help=f"activation threshold (default {DEFAULT_TAU})")
    p_match.add_argument("--mode", choices=QUERY_MODES, default="intersection",
                         help="dimension-set combination (default intersection)")
    p_match.add_argument("--top-k", type=int, dest="top_k", default=DEFAULT_TOP_K,
                         help=f"max results (default {DEFAULT_TOP_K})")
    p_match.add_argument("--max-len", type=int, dest="match_max_len", default=DEFAULT_MAX_LEN,
                         help=f"max region length (default {DEFAULT_MAX_LEN})")
    p_match.add_argument("--within-sentence", action="store_true",
                         help="do not let regions cross sentence boundaries")
    p_match.add_argument("--json", action="store_true",
                         help="emit the select/match payloads as canonical JSON")
    p_match.add_argument("--out", help="write the TSV to this file as well")
    p_match.add_argument("--plot", help="write a length-distribution figure to this file")
    p_match.set_defaults(func=cmd_match)

    p_serve = sub.add_parser("serve", help="serve the trace explorer API (and UI)")
    p_serve.add_argument("--trace", required=True, help="trace file from export")
    p_serve.add_argument("--port", type=int, default=8000, help="TCP port (default 8000)")
    p_serve.add_argument("--host", default="127.0.0.1", help="bind address (default loopback)")
    p_serve.add_argument("--tau", type=float, default=DEFAULT_TAU,
                         help=f"default threshold for queries (default {DEFAULT_TAU})")
    p_serve.add_argument("--ui", help="directory of static UI assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load_config(args)
    lexicon_path = _resolve(args, config, "lexicon", None)
    vocab_size = _resolve(args, config, "vocab_size", 5000)
    lexicon = load_lexicon(lexicon_path)
    result = ingest_documents(args.manifest)
    for error in result.errors:
        print(f"warning: {error}", file=sys.stderr)
    corpus = preprocess(result.documents, lexicon, vocab_capacity=vocab_size)
    save_corpus(corpus, args.out)
    table = format_stats_table(corpus_stats(corpus))
    print(table)
    if args.stats_out:
        Path(args.stats_out).write_text(table + "\n", encoding="utf-8")
    logger.info("corpus written to %s", args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    corpus = load_corpus(args.corpus)
    model_config = ModelConfig(
        vocab_size=len(corpus.vocabulary),
        emb_dim=_resolve(args, config, "emb_dim", 300),
        hidden_dim=_resolve(args, config, "hidden_dim", 512),
        fusion_dim=_resolve(args, config, "fusion_dim", 200),
        max_len=_resolve(args, config, "max_len", 50),
        word_weight=_resolve(args, config, "word_weight", 1.0),
        vague_weight=_resolve(args, config, "vague_weight", 2.0),
        gru_variant=_resolve(args, config, "gru_variant", "standard_reset"),
    )
    train_config = TrainConfig(
        epochs=_resolve(args, config, "epochs", 25),
        batch_size=_resolve(args, config, "batch_size", 32),
        learning_rate=_resolve(args, config, "learning_rate", 1e-3),
        rmsprop_decay=_resolve(args, config, "rmsprop_decay", 0.9),
        rmsprop_epsilon=_resolve(args, config, "rmsprop_epsilon", 1e-8),
        seed=_resolve(args, config, "seed", 0),
        shuffle=not args.no_shuffle and _resolve(args, config, "shuffle", True),
        embeddings_path=_resolve(args, config, "embeddings", None),
        freeze_embeddings=args.freeze_embeddings
        or bool(_resolve(args, config, "freeze_embeddings", False)),
        holdout_fraction=_resolve(args, config, "holdout_fraction", 0.0),
    )
    callback = None
    if args.checkpoint_every > 0:
        out_model = Path(args.out_model)

        def callback(epoch: int, params) -> None:
            if epoch % args.checkpoint_every == 0:
                path = out_model.with_name(f"{out_model.name}.epoch{epoch:03d}")
                save_checkpoint(path, params, model_config)
                logger.info("checkpoint written to %s", path)

    result = train(corpus, model_config, train_config, epoch_callback=callback)
    save_checkpoint(args.out_model, result.params, model_config)
    logger.info("model written to %s", args.out_model)
    if args.metrics:
        write_metrics_csv(result.metrics, args.metrics)
        if not args.no_plot:
            from .report import save_training_curves

            figure = Path(args.metrics).with_suffix(".png")
            save_training_curves(result.metrics, figure)
            logger.info("training curves written to %s", figure)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    from .trace import export_trace

    params, model_config = load_checkpoint(args.model)
    corpus = load_corpus(args.corpus)
    trace = export_trace(params, model_config, corpus, out_path=args.out_trace)
    logger.info("trace of %d tokens written to %s", len(trace), args.out_trace)
    if args.debug_json:
        Path(args.debug_json).write_text(trace_debug_json(trace), encoding="utf-8")
    return 0


def _match_tsv(payload: dict) -> str:
    lines = ["rank\tstart\tend\tlength\textra_on_count\ttruncated\ttext"]
    for m in payload["matches"]:
        lines.append(
            f"{m['rank']}\t{m['start']}\t{m['end']}\t{m['length']}\t"
            f"{m['extra_on_count']}\t{int(m['truncated'])}\t{' '.join(m['surfaces'])}"
        )
    return "\n".join(lines)


def cmd_match(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    tau = args.tau if args.tau is not None else DEFAULT_TAU
    phrase = (args.span[0], args.span[1])
    context = (args.context[0], args.context[1]) if args.context else None
    selection = select_payload(trace, phrase, context, tau, args.mode)
    matches = match_payload(
        trace,
        tuple(selection["query_dims"]),
        tau=tau,
        max_len=args.match_max_len,
        top_k=args.top_k,
        within_sentence=args.within_sentence,
    )
    if args.json:
        sys.stdout.buffer.write(canonical_json({"select": selection, "match": matches}))
        sys.stdout.buffer.write(b"\n")
        sys.stdout.buffer.flush()
    else:
        tsv = _match_tsv(matches)
        print(tsv)
        if args.out:
            Path(args.out).write_text(tsv + "\n", encoding="utf-8")
    plot_path = args.plot
    if plot_path is None and args.out:
        plot_path = str(Path(args.out).with_suffix(".png"))
    if plot_path:
        from .report import save_length_histogram

        hist = {length: count for length, count in matches["length_histogram"]}
        save_length_histogram(hist, plot_path)
        logger.info("length distribution written to %s", plot_path)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    ui_dir = args.ui
    if ui_dir is not None and not Path(ui_dir).is_dir():
        raise ServerError(f"UI directory not found: {ui_dir}")
    logger.info("serving %d tokens on %s:%d", len(trace), args.host, args.port)
    run_server(trace, args.port, host=args.host, default_tau=args.tau, ui_dir=ui_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
