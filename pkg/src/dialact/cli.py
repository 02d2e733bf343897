"""Command-line front end for the full pipeline.

Subcommands: ``stats``, ``prepare``, ``train``, ``evaluate``, ``predict``,
``fetch``, ``gen-fixture-embeddings``.  Flags override values from an
optional ``--config`` file of ``key = value`` lines.  Exit codes: 0 on
success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import corpus, ingest
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .evaluation import (
    evaluate,
    render_confusion,
    render_metrics_csv,
    render_results_table,
)
from .models import (
    ArchitectureKind,
    Example,
    ModelConfig,
    ModelError,
    TrainConfig,
    build_model,
    predict,
)
from .representation import (
    RepresentationError,
    build_prob_matrix,
    coverage_check,
    load_prob_matrix,
    load_sentence_embeddings,
    load_word_embeddings,
    save_prob_matrix,
)
from .tags import TagError
from .training import EncoderContext, encode_dataset, train

ARCH_CHOICES = tuple(k.value for k in ArchitectureKind)


class UsageError(ValueError):
    pass


def _load_config_file(path: str) -> dict[str, object]:
    """Parse ``key = value`` lines; values are JSON scalars where possible."""
    values: dict[str, object] = {}
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        try:
            values[key] = json.loads(value)
        except json.JSONDecodeError:
            values[key] = value
    return values


def _resolve(args, config: dict, key: str, default):
    """Flag value if given, else config-file value, else built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _fail_runtime(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_stats(args, config) -> int:
    ds = corpus.load_dataset(args.dataset, tokenizer_mode=args.tokenizer_mode)
    stats = corpus.dataset_stats(ds)
    print("categories utterances tokens")
    print(f"{stats.n_categories} {stats.n_utterances} {stats.n_tokens}")
    return 0


def cmd_prepare(args, config) -> int:
    records = []
    for path in args.input:
        text = Path(path).read_text("utf-8")
        file_records = corpus.parse_swda_file(text)
        if file_records and not file_records[0].dialogue_id:
            stem = Path(path).stem
            file_records = [replace(r, dialogue_id=stem) for r in file_records]
        records.extend(file_records)
    ds, dropped = corpus.dataset_from_swda(records, name=args.name)
    corpus.save_dataset(ds, args.out)
    stats = corpus.dataset_stats(ds)
    print(
        f"wrote {stats.n_utterances} utterances "
        f"({len(ds.dialogue_ids())} dialogues, {dropped} dropped continuations) "
        f"to {args.out}"
    )
    return 0


def _arch_context(kind: ArchitectureKind, args, dataset=None,
                  out_dir: Path | None = None, min_freq: int = 5) -> EncoderContext:
    """Build or load the representation inputs an architecture needs."""
    if kind is ArchitectureKind.PROB_LSTM:
        if getattr(args, "prob_matrix", None):
            return EncoderContext(prob_matrix=load_prob_matrix(args.prob_matrix))
        if dataset is None:
            raise UsageError("prob-lstm requires --prob-matrix")
        pm = build_prob_matrix(dataset, min_freq=min_freq)
        if out_dir is not None:
            save_prob_matrix(pm, out_dir / "prob_matrix.json")
        return EncoderContext(prob_matrix=pm)
    if kind is ArchitectureKind.GLOVE_LSTM:
        if not args.embeddings:
            raise UsageError("glove-lstm requires --embeddings")
        return EncoderContext(word_table=load_word_embeddings(args.embeddings))
    if not args.sentence_embeddings:
        raise UsageError(f"{kind.value} requires --sentence-embeddings")
    return EncoderContext(
        sentence_store=load_sentence_embeddings(args.sentence_embeddings)
    )


def _context_input_dim(kind: ArchitectureKind, ctx: EncoderContext) -> int:
    if kind is ArchitectureKind.PROB_LSTM:
        return ctx.prob_matrix.m
    if kind is ArchitectureKind.GLOVE_LSTM:
        return ctx.word_table.dim
    return ctx.sentence_store.dim


def cmd_train(args, config) -> int:
    kind = ArchitectureKind(args.arch)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tokenizer_mode = _resolve(args, config, "tokenizer_mode", "speech")
    val_fraction = float(_resolve(args, config, "val_fraction", 0.1))
    split_seed = int(_resolve(args, config, "split_seed", 42))
    min_freq = int(_resolve(args, config, "min_freq", 5))
    seed = int(_resolve(args, config, "seed", 0))
    shuffle_seed = _resolve(args, config, "shuffle_seed", None)
    shuffle_seed = seed if shuffle_seed is None else int(shuffle_seed)

    dataset = corpus.load_dataset(args.train, tokenizer_mode=tokenizer_mode)
    if val_fraction > 0 and len(dataset.dialogue_ids()) >= 2:
        train_ds, val_ds = corpus.split_train_val(dataset, val_fraction, split_seed)
    else:
        train_ds, val_ds = dataset, None

    ctx = _arch_context(kind, args, dataset=train_ds, out_dir=out_dir,
                        min_freq=min_freq)
    if kind.uses_sentence_store:
        missing = coverage_check(ctx.sentence_store, dataset)
        if missing:
            for key in missing:
                print(f"missing sentence vector: {key[0]} turn {key[1]}",
                      file=sys.stderr)
            return _fail_runtime(f"{len(missing)} utterances lack sentence vectors")

    dense_dims = None
    if kind is ArchitectureKind.USE_DENSE:
        raw = _resolve(args, config, "dense_dims", "128,64,42")
        dense_dims = tuple(int(d) for d in str(raw).split(","))
    mc = ModelConfig(
        kind=kind,
        input_dim=_context_input_dim(kind, ctx),
        hidden_dim=int(_resolve(args, config, "hidden_dim", 128)),
        max_len=int(_resolve(args, config, "max_len", 128)),
        context_window=int(_resolve(args, config, "context_window", 3)),
        seed=seed,
        dense_dims=dense_dims,
    )
    tc = TrainConfig(
        learning_rate=float(_resolve(args, config, "lr", 0.001)),
        batch_size=int(_resolve(args, config, "batch_size", 64)),
        epochs=int(_resolve(args, config, "epochs", 10)),
        seed=shuffle_seed,
    )

    train_examples = encode_dataset(train_ds, mc, ctx)
    val_examples = encode_dataset(val_ds, mc, ctx) if val_ds is not None else []
    model = build_model(mc)
    tm = train(model, train_examples, val_examples, tc)

    save_checkpoint(tm, out_dir / "checkpoint.json")
    with open(out_dir / "history.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,train_acc,val_acc,mean_loss\n")
        for epoch, stats in enumerate(tm.history, start=1):
            val = "" if stats.val_acc is None else repr(stats.val_acc)
            fh.write(f"{epoch},{stats.train_acc!r},{val},{stats.mean_loss!r}\n")

    if tm.history:
        final = tm.history[-1]
        val = "n/a" if final.val_acc is None else f"{final.val_acc:.4f}"
        print(f"acc={final.train_acc:.4f} val_acc={val}")
    else:
        print("acc=n/a val_acc=n/a (0 epochs)")
    print(f"checkpoint: {out_dir / 'checkpoint.json'}")
    return 0


def cmd_evaluate(args, config) -> int:
    tm = load_checkpoint(args.checkpoint)
    kind = tm.config.kind
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tokenizer_mode = _resolve(args, config, "tokenizer_mode", "github")
    dataset = corpus.load_dataset(args.dataset, tokenizer_mode=tokenizer_mode)
    ctx = _arch_context(kind, args)
    if _context_input_dim(kind, ctx) != tm.config.input_dim:
        return _fail_runtime(
            f"checkpoint expects input_dim={tm.config.input_dim}, context provides "
            f"{_context_input_dim(kind, ctx)}"
        )
    report = evaluate(tm.model, dataset, ctx)

    (out_dir / "metrics.csv").write_bytes(render_metrics_csv(report))
    (out_dir / "confusion.csv").write_bytes(render_confusion(report.confusion, "csv"))
    (out_dir / "confusion.svg").write_bytes(
        render_confusion(report.confusion, "svg", min_support=args.min_support)
    )
    name = args.model_name or kind.value
    final = tm.history[-1] if tm.history else None
    row = (
        name,
        final.train_acc if final else None,
        final.val_acc if final else None,
        report.accuracy,
    )
    (out_dir / "results.txt").write_bytes(render_results_table([row], "text"))
    print(f"test_acc={report.accuracy:.4f}")
    return 0


def cmd_predict(args, config) -> int:
    tm = load_checkpoint(args.checkpoint)
    kind = tm.config.kind
    ctx = _arch_context(kind, args)

    if args.dataset:
        tokenizer_mode = _resolve(args, config, "tokenizer_mode", "github")
        dataset = corpus.load_dataset(args.dataset, tokenizer_mode=tokenizer_mode)
        examples = encode_dataset(dataset, tm.config, ctx)
        texts = [u.text for u in dataset.utterances]
    else:
        if kind.uses_sentence_store:
            raise UsageError(
                f"{kind.value} needs --dataset (+ --sentence-embeddings); raw text "
                "has no precomputed sentence vector"
            )
        lines = args.text if args.text else [l.rstrip("\n") for l in sys.stdin]
        mode = _resolve(args, config, "tokenizer_mode", "github")
        utts = tuple(
            corpus.Utterance(
                dialogue_id="stdin", turn_index=i, speaker="", text=line,
                tokens=tuple(corpus.tokenize(line, mode)),
            )
            for i, line in enumerate(lines)
        )
        dataset = corpus.Dataset("stdin", mode, utts)
        examples = encode_dataset(dataset, tm.config, ctx)
        texts = [u.text for u in dataset.utterances]

    for ex, text in zip(examples, texts):
        _, tag = predict(tm.model, ex.input)
        print(f"{tag.label}\t{text}")
    return 0


def cmd_fetch(args, config) -> int:
    try:
        owner, repo = args.repo.split("/", 1)
    except ValueError:
        raise UsageError("--repo must look like owner/name") from None
    issues = [int(x) for x in args.issues.split(",") if x.strip()]
    if not issues:
        raise UsageError("--issues must list at least one issue number")
    refs = [ingest.IssueRef(owner, repo, n) for n in issues]
    transport = (
        ingest.FixtureTransport.from_file(args.fixture) if args.fixture else None
    )
    comments = ingest.fetch_many(refs, transport=transport)
    written = ingest.emit_unlabeled(comments, args.out)
    print(f"wrote {written} utterances from {len(refs)} issues to {args.out}")
    return 0


def _fixture_vector(seed: int, dialogue_id: str, turn_index: int, dim: int) -> np.ndarray:
    key = f"{seed}|{dialogue_id}|{turn_index}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def cmd_gen_fixture_embeddings(args, config) -> int:
    if args.dim < 1:
        raise UsageError("--dim must be >= 1")
    dataset = corpus.load_dataset(args.dataset, tokenizer_mode=args.tokenizer_mode)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": args.dim, "encoder": "fixture"}) + "\n")
        for utt in dataset.utterances:
            vec = _fixture_vector(args.seed, utt.dialogue_id, utt.turn_index, args.dim)
            fh.write(json.dumps({
                "dialogue_id": utt.dialogue_id,
                "turn_index": utt.turn_index,
                "vector": vec.tolist(),
            }) + "\n")
    print(f"wrote {len(dataset)} fixture vectors (dim {args.dim}) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_context_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", help="word-embedding text file (glove-lstm)")
    p.add_argument("--sentence-embeddings",
                   help="sentence-embedding JSONL (use, use-lstm, bert-head)")
    p.add_argument("--prob-matrix", help="saved probability matrix (prob-lstm)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialact",
        description="Dialogue act classification: corpora, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print dataset statistics")
    p.add_argument("dataset")
    p.add_argument("--tokenizer-mode", choices=corpus.TOKENIZER_MODES,
                   default="github")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("prepare", help="convert Switchboard-format files to a dataset")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="swda")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one architecture")
    p.add_argument("--arch", choices=ARCH_CHOICES, required=True)
    p.add_argument("--train", required=True, help="training dataset (JSONL)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="key = value defaults file")
    p.add_argument("--tokenizer-mode", choices=corpus.TOKENIZER_MODES)
    p.add_argument("--val-fraction", type=float, dest="val_fraction")
    p.add_argument("--split-seed", type=int, dest="split_seed")
    p.add_argument("--min-freq", type=int, dest="min_freq")
    p.add_argument("--seed", type=int, help="parameter-init seed")
    p.add_argument("--shuffle-seed", type=int, dest="shuffle_seed",
                   help="minibatch shuffle seed (defaults to --seed)")
    p.add_argument("--hidden-dim", type=int, dest="hidden_dim")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--context-window", type=int, dest="context_window")
    p.add_argument("--dense-dims", dest="dense_dims",
                   help="comma list of the three use-architecture layer widths")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--lr", type=float)
    _add_context_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a labeled dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="key = value defaults file")
    p.add_argument("--tokenizer-mode", choices=corpus.TOKENIZER_MODES)
    p.add_argument("--min-support", type=int, default=0,
                   help="confusion SVG keeps classes with at least this support")
    p.add_argument("--model-name", help="row label in results.txt")
    _add_context_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="tag utterances with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config", help="key = value defaults file")
    p.add_argument("--dataset", help="JSONL dataset to tag")
    p.add_argument("--text", action="append",
                   help="tag a literal utterance (repeatable); stdin when absent")
    p.add_argument("--tokenizer-mode", choices=corpus.TOKENIZER_MODES)
    _add_context_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fetch", help="download GitHub issue comments as a dataset")
    p.add_argument("--repo", required=True, help="owner/name")
    p.add_argument("--issues", required=True, help="comma-separated issue numbers")
    p.add_argument("--out", required=True)
    p.add_argument("--fixture", help="recorded-response file (offline mode)")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("gen-fixture-embeddings",
                       help="deterministic random unit vectors for every utterance")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--tokenizer-mode", choices=corpus.TOKENIZER_MODES,
                   default="github")
    p.set_defaults(func=cmd_gen_fixture_embeddings)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    config: dict[str, object] = {}
    try:
        if getattr(args, "config", None):
            config = _load_config_file(args.config)
        return args.func(args, config)
    except UsageError as e:
        return _fail_usage(str(e))
    except FileNotFoundError as e:
        # a nonexistent path argument is a usage problem, not a runtime one
        return _fail_usage(str(e))
    except (corpus.CorpusError, RepresentationError, ModelError, CheckpointError,
            TagError, ingest.IngestError, OSError) as e:
        return _fail_runtime(str(e))


if __name__ == "__main__":
    sys.exit(main())
