#!/usr/bin/env python3
"""Regenerate crates/core/data/largep120_beta.txt.

The first 60 coefficients are one draw from N(3, variance 0.5) with numpy's
default generator seeded at 20120; the last 60 are zero. The file is frozen in
the repository and its SHA-256 is checked by the test suite, so this script is
only needed to audit how the values were produced.
"""

import hashlib
import math
import pathlib
import sys

import numpy as np

SEED = 20120
EXPECTED_SHA256 = "6fab111674431c02e1dcf258de2c63876878c06624e88ae3fc89b5fd772e3efb"
OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "data" / "largep120_beta.txt"


def main() -> int:
    rng = np.random.default_rng(SEED)
    signal = rng.normal(3.0, math.sqrt(0.5), 60)
    lines = [f"{v:.6f}" for v in signal] + [f"{0.0:.6f}"] * 60
    text = "\n".join(lines) + "\n"
    digest = hashlib.sha256(text.encode()).hexdigest()
    if "--write" in sys.argv:
        OUT.write_text(text)
        print(f"wrote {OUT}")
    print(f"sha256 {digest} ({'matches' if digest == EXPECTED_SHA256 else 'DIFFERS from'} the frozen file)")
    return 0 if digest == EXPECTED_SHA256 else 1


if __name__ == "__main__":
    sys.exit(main())
