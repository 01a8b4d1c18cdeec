#!/usr/bin/env python3
"""Fetch the MovieLens 100K interaction file into data/ml-100k/u.data.

The canonical GroupLens host is not reachable from every network, so this
pulls the identical interaction table bundled inside the recbole wheel on
PyPI and rewrites it to the classic 4-column u.data layout
(user, item, rating, timestamp; tab-separated, no header).

Usage: python3 scripts/fetch_movielens.py [dest_dir]
"""

import pathlib
import subprocess
import sys
import tempfile
import zipfile

INTER_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"
EXPECTED_ROWS = 100_000


def main() -> int:
    dest = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/ml-100k")
    target = dest / "u.data"
    if target.exists() and sum(1 for _ in open(target)) == EXPECTED_ROWS:
        print(f"{target} already present")
        return 0
    dest.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole==1.2.1",
             "--no-deps", "--no-binary", ":none:", "-d", tmp],
            check=True)
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            raw = z.read(INTER_MEMBER).decode()
    lines = raw.strip().split("\n")[1:]  # drop the typed header
    if len(lines) != EXPECTED_ROWS:
        print(f"unexpected row count {len(lines)}", file=sys.stderr)
        return 1
    with open(target, "w") as fh:
        for line in lines:
            user, item, rating, ts = line.split("\t")
            fh.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
    print(f"wrote {target} ({EXPECTED_ROWS} interactions)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
