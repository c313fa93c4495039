"""``render`` command: draw one figure from an experiment output directory.

Usage::

    render --in out/holder-path --figure holder-path --out holder.png

Exit status 0 on success; 1 with the offending path on stderr when an input
file is missing or does not match the expected schema.
"""

import argparse
import sys

from .figures import FIGURES, render
from .loader import FigureInputError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="experiment output directory")
    parser.add_argument("--figure", required=True, choices=sorted(FIGURES),
                        help="figure name (matches the experiment name)")
    parser.add_argument("--out", dest="output", required=True,
                        help="image file to write (.png, .pdf, .svg, ...)")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        render(args.input_dir, args.figure, args.output, dpi=args.dpi)
    except FigureInputError as err:
        print(f"render: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
