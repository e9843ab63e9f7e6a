"""Write the lambda_B sweeps of both worked examples to results/ through the command-line driver."""

from __future__ import annotations

import argparse
from pathlib import Path

from xva.cli import main as xva


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--paths", default="100000")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(exist_ok=True)
    runs = {
        "example1_csa.csv": ["example1", "--csa"],
        "example1_no_csa.csv": ["example1", "--no-csa"],
        "example2.csv": ["example2"],
    }
    for name, argv in runs.items():
        extra = ["--paths", args.paths] if argv[0] == "example1" else []
        code = xva(argv + extra + ["--out", str(out / name)])
        print(f"{name}: exit {code}")
        print((out / name).read_text())


if __name__ == "__main__":
    main()
