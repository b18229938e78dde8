"""Regenerate data/sp500_synthetic.csv.

Simulates 754 SVIJ returns with the CLI and attaches business-day dates
starting 2016-04-06 (weekends skipped, holidays ignored).

    python3 tools/make_sp500_fixture.py build/tools/pmmhfilters
"""
import csv
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

root = Path(__file__).resolve().parent.parent
cli = sys.argv[1] if len(sys.argv) > 1 else str(root / "build/tools/pmmhfilters")

with tempfile.TemporaryDirectory() as tmp:
    subprocess.run([cli, "simulate", "--config", str(root / "configs/sp500_fixture.json"),
                    "--out", tmp], check=True, stdout=subprocess.DEVNULL)
    with open(Path(tmp) / "series.csv") as f:
        returns = [row["return"] for row in csv.DictReader(f)]

dates = np.busday_offset("2016-04-06", np.arange(len(returns)), roll="forward")
out = root / "data/sp500_synthetic.csv"
with open(out, "w", newline="") as f:
    f.write("date,return\n")
    for d, r in zip(dates, returns):
        f.write(f"{d},{r}\n")
print(f"wrote {len(returns)} rows to {out}")
