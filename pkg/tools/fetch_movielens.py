"""Rebuild the MovieLens 100k raw files (u.data, u.item, u.genre).

The grouplens host is not always reachable from build machines, so this
script pulls the copy bundled with the ``pytorch-widedeep`` wheel on PyPI
and writes it back out in the original MovieLens layout.

    python tools/fetch_movielens.py data/ml-100k
"""
import argparse
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import pandas as pd

WHEEL = "pytorch-widedeep==1.7.0"
MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_{}.parquet.brotli"


def _cell(value):
    if value is None or (isinstance(value, float) and value != value):
        return ""
    return str(value)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("target", type=Path, nargs="?", default=Path("data/ml-100k"))
    args = parser.parse_args(argv)
    args.target.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, WHEEL],
            check=True,
        )
        wheel = next(Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            for name in ("data", "items"):
                zf.extract(MEMBER.format(name), tmp)
        data = pd.read_parquet(Path(tmp) / MEMBER.format("data"))
        items = pd.read_parquet(Path(tmp) / MEMBER.format("items"))

    with open(args.target / "u.data", "w", encoding="ascii", newline="\n") as fh:
        for row in data[["user_id", "movie_id", "rating", "timestamp"]].itertuples(index=False):
            fh.write("\t".join(str(int(v)) for v in row) + "\n")

    genre_cols = list(items.columns[5:])
    assert len(genre_cols) == 19, genre_cols
    with open(args.target / "u.item", "w", encoding="latin-1", newline="\n") as fh:
        for row in items.itertuples(index=False):
            meta = [str(int(row[0]))] + [_cell(v) for v in row[1:5]]
            flags = [str(int(v)) for v in row[5:]]
            fh.write("|".join(meta + flags) + "\n")

    with open(args.target / "u.genre", "w", encoding="ascii", newline="\n") as fh:
        for i, name in enumerate(genre_cols):
            fh.write(f"{name}|{i}\n")
        fh.write("\n")

    print(f"wrote {len(data)} ratings and {len(items)} items to {args.target}")


if __name__ == "__main__":
    main()
