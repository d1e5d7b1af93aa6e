#!/usr/bin/env python3
"""Full experiment grid: 4 scenarios x 4 modes x 25 rates -> sweep.csv.

Equivalent to `corridorsim sweep` with the defaults; kept as a script so the
study is reproducible with one command and no flag archaeology.
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from corridorsim.cli import main  # noqa: E402

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out"
    jobs = sys.argv[2] if len(sys.argv) > 2 else "1"
    t0 = time.time()
    rc = main(["sweep", "--out", out, "--jobs", jobs])
    print(f"{time.time() - t0:.1f} s")
    sys.exit(rc)
