"""export-embeddings command line.

Exit codes: 0 success, 1 usage error, 2 unreadable corpus or unloadable
model.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .export import ExportManifest, ModelLoadError, export_embeddings


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = _Parser(prog="export-embeddings")
    parser.add_argument("--corpus", required=True, help="corpus directory")
    parser.add_argument("--model", required=True,
                        help="model name or local path")
    parser.add_argument("--out", required=True, help="output vector file")
    parser.add_argument("--max-len", type=int, default=64)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=16)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    manifest = ExportManifest(
        corpus_dir=args.corpus, model=args.model, out_path=args.out,
        max_len=args.max_len, device=args.device, batch_size=args.batch_size,
    )
    try:
        export_embeddings(manifest)
    except (ModelLoadError, FileNotFoundError, ValueError, OSError) as exc:
        sys.stderr.write(f"export-embeddings: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
