#!/usr/bin/env python3
"""Fetch rating datasets into the data directory in the layouts the loaders read.

MovieLens: the compact ml-100k distribution, taken from the recbole wheel on
PyPI (its atomic .inter/.item files), rewritten as ratings.csv and movies.csv.
Jester: copied from --jester if given (jester-data-1 exported as CSV).
"""

import argparse
import csv
import pathlib
import shutil
import subprocess
import sys
import tempfile
import zipfile

RECBOLE = "recbole==1.2.1"
INTER = "recbole/dataset_example/ml-100k/ml-100k.inter"
ITEM = "recbole/dataset_example/ml-100k/ml-100k.item"


def download_wheel(dest: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:", "-d", str(dest), RECBOLE],
        check=True,
    )
    wheels = sorted(dest.glob("recbole-*.whl"))
    if not wheels:
        raise SystemExit("pip did not produce a recbole wheel")
    return wheels[0]


def convert_movielens(wheel: pathlib.Path, out: pathlib.Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(wheel) as z:
        inter = z.read(INTER).decode("latin-1").splitlines()
        items = z.read(ITEM).decode("latin-1").splitlines()
    with open(out / "ratings.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["userId", "movieId", "rating", "timestamp"])
        for line in inter[1:]:
            user, item, rating, ts = line.split("\t")
            w.writerow([user, item, f"{float(rating):.1f}", int(float(ts))])
    with open(out / "movies.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["movieId", "title", "genres"])
        for line in items[1:]:
            item, title, year, genres = (line.split("\t") + ["", "", ""])[:4]
            label = f"{title} ({year})" if year else title
            w.writerow([item, label, "|".join(genres.split()) or "(no genres listed)"])
    print(f"wrote {out / 'ratings.csv'} ({len(inter) - 1} ratings) and {out / 'movies.csv'} ({len(items) - 1} movies)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--wheel", help="use an already downloaded recbole wheel")
    parser.add_argument("--jester", help="path to jester-data-1 exported as CSV")
    args = parser.parse_args()
    data = pathlib.Path(args.data_dir)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else download_wheel(pathlib.Path(tmp))
        convert_movielens(wheel, data / "movielens")

    if args.jester:
        (data / "jester").mkdir(parents=True, exist_ok=True)
        shutil.copyfile(args.jester, data / "jester" / "jester-data-1.csv")
        print(f"copied {args.jester} to {data / 'jester' / 'jester-data-1.csv'}")
    else:
        print("jester: no public mirror is reachable from here; pass --jester PATH to install a local copy")


if __name__ == "__main__":
    main()
