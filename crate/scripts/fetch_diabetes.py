#!/usr/bin/env python3
"""Write the diabetes data (n=442, p=10) to data/diabetes.csv.

Source: the raw (unscaled) diabetes table that ships with scikit-learn,
with the column names used by the R `lars` package. The response column is
`prog` (disease progression one year after baseline).

Usage: python3 scripts/fetch_diabetes.py [output-path]
"""
import hashlib
import os
import sys

from sklearn.datasets import load_diabetes

NAMES = ["age", "sex", "bmi", "map", "tc", "ldl", "hdl", "tch", "ltg", "glu"]
EXPECTED_SHA256 = "11c024c62abee49c81cbdf24b7dce85fd2d01e61d6c0cbea408369a721a96aff"


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join("data", "diabetes.csv")
    data = load_diabetes(scaled=False)
    lines = [",".join(NAMES + ["prog"])]
    for row, target in zip(data.data, data.target):
        lines.append(",".join(f"{v:g}" for v in list(row) + [target]))
    body = ("\n".join(lines) + "\n").encode()
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "wb") as f:
        f.write(body)
    digest = hashlib.sha256(body).hexdigest()
    print(f"wrote {out} ({len(lines) - 1} rows), sha256 {digest}")
    if digest != EXPECTED_SHA256:
        print("warning: hash differs from the documented value", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
