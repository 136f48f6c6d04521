"""Command-line entry points: export molecule or caption embedding files.

Exit codes: 0 success, 2 validation/usage error, 1 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from caprank.store import load_manifest

from .extract import (
    extract_caption_embeddings,
    extract_molecule_embeddings,
    read_caption_file,
)


def cmd_molecules(args) -> int:
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = extract_molecule_embeddings(
        manifest, args.encoder, out_dir / f"{manifest.dataset}.mol.emb"
    )
    print(f"wrote {path}")
    return 0


def cmd_captions(args) -> int:
    manifest = load_manifest(args.manifest)
    records = read_caption_file(args.captions)
    report = extract_caption_embeddings(
        records,
        manifest,
        args.encoder,
        args.out,
        fill_missing_with_zeros=args.fill_missing_with_zeros,
        debug_row_order=args.debug_row_order,
    )
    for captioner in sorted(report.files):
        note = (
            f" ({report.truncated[captioner]} caption(s) truncated)"
            if report.truncated[captioner]
            else ""
        )
        print(f"wrote {report.files[captioner]}{note}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capembed",
        description="Export embedding files for the caption-ranking engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("molecules", help="encode manifest molecules to one embedding file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--encoder", default="gin-small")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_molecules)

    p = sub.add_parser("captions", help="encode a caption file to one embedding file per captioner")
    p.add_argument("--manifest", required=True)
    p.add_argument("--captions", required=True, help="JSONL of caption records")
    p.add_argument("--encoder", default="textmean-base")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--fill-missing-with-zeros", action="store_true")
    p.add_argument(
        "--debug-row-order",
        action="store_true",
        help="verify row-to-molecule assignment with sentinel captions first",
    )
    p.set_defaults(func=cmd_captions)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- last-resort boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
