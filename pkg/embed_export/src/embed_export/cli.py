"""embed-export command line: dataset JSONL -> sentence-embedding JSONL."""

from __future__ import annotations

import argparse
import sys

from .encoders import ENCODER_DIMS, EncoderUnavailable
from .exporter import ExportError, ExportJob, export_embeddings, verify_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Compute sentence embeddings for a dialogue-act dataset.",
    )
    parser.add_argument("--dataset", required=True, help="dataset JSONL")
    parser.add_argument("--encoder", required=True, choices=sorted(ENCODER_DIMS))
    parser.add_argument("--out", required=True, help="output embedding JSONL")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--model-path", help="local model directory / hub handle")
    parser.add_argument("--verify-only", action="store_true",
                        help="check an existing export instead of computing one")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        if args.verify_only:
            missing = verify_export(args.dataset, args.out)
            if missing:
                for did, ti in missing:
                    print(f"missing: {did} turn {ti}", file=sys.stderr)
                return 1
            print("ok: full coverage")
            return 0
        job = ExportJob(args.dataset, args.encoder, args.out,
                        batch_size=args.batch_size, model_path=args.model_path)
        result = export_embeddings(job)
        print(f"wrote {result.n_vectors} vectors "
              f"(dim {ENCODER_DIMS[args.encoder]}, {result.n_truncated} truncated) "
              f"to {args.out}")
        return 0
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ExportError, EncoderUnavailable, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
