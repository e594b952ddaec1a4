"""plotkit <kind> --in <dir> --out <file>"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, render
from .reading import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="figures from thinfilmlab output directories",
    )
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="thinfilmlab output directory")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="figure file (.svg or .png)")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.in_dir, args.out_path)
    except (SchemaError, OSError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
